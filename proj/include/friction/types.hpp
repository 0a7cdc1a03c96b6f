#ifndef FRICTION_TYPES_HPP
#define FRICTION_TYPES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace friction {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

enum class TrajectoryStatus { solved, exhausted, aborted };
enum class FeedbackMechanism { F1, F2, F3 };
enum class SamplingStrategy { greedy, temp_schedule, temp_schedule_plus_rejection };
enum class CategoryLabel { FR, FQ, OTH };
enum class ModelKind { remote, scripted };
enum class ScriptMode { fixed_script, obey_with_probability, echo_feedback_trigger };
enum class TaskFormat { multiple_choice, open_ended, numeric_boxed };

std::string to_string(TrajectoryStatus s);
std::string to_string(FeedbackMechanism m);
std::string to_string(SamplingStrategy s);
std::string to_string(CategoryLabel l);
std::string to_string(ModelKind k);
std::string to_string(ScriptMode m);

TrajectoryStatus trajectory_status_from_string(const std::string& s);
FeedbackMechanism feedback_mechanism_from_string(const std::string& s);
SamplingStrategy sampling_strategy_from_string(const std::string& s);
CategoryLabel category_label_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);
ScriptMode script_mode_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Task instances
// ---------------------------------------------------------------------------

struct Choice {
    std::string label;
    std::string text;

    bool operator==(const Choice&) const = default;
};

/// One task instance: the question, its ground truth, accepted aliases and
/// optional reference solution steps. Immutable after validation.
struct Problem {
    std::string id;
    std::string task;
    std::string question;
    std::vector<Choice> choices;  // empty unless multiple-choice
    std::string answer;
    std::set<std::string> aliases;  // always contains answer
    std::optional<std::string> solution_steps;
    std::optional<std::string> category;  // for category-matched few-shot sampling
    std::map<std::string, double> metadata;

    bool operator==(const Problem&) const = default;
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;

    bool operator==(const TokenLogprob&) const = default;
};

/// One solver attempt. `feedback` is present exactly when the attempt was
/// incorrect and another iteration followed.
struct IterationRecord {
    int iteration = 0;
    std::string raw_output;
    std::string parsed_answer;
    bool correct = false;
    std::optional<std::string> feedback;
    double temperature = 0.0;
    std::optional<std::vector<TokenLogprob>> token_logprobs;

    bool operator==(const IterationRecord&) const = default;
};

/// Full per-problem history of attempts and feedback.
struct Trajectory {
    std::string problem_id;
    std::vector<IterationRecord> records;
    std::optional<int> solved_at;
    TrajectoryStatus status = TrajectoryStatus::exhausted;
    std::optional<std::string> abort_reason;  // set when status == aborted

    bool operator==(const Trajectory&) const = default;
};

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// Deterministic offline stand-in for a chat model. A scripted completion is
/// a pure function of (script, messages, RNG stream position).
struct ScriptedBehavior {
    ScriptMode mode = ScriptMode::fixed_script;
    std::vector<std::string> answers_by_iteration;        // fixed_script
    std::optional<double> obey_probability;               // obey_with_probability
    std::optional<double> initial_correct_probability;    // obey_with_probability, iteration 0
    std::optional<std::string> trigger_token;             // echo_feedback_trigger
    std::vector<double> token_probabilities;              // per-token probs, cycled; empty = 1.0

    bool operator==(const ScriptedBehavior&) const = default;
};

struct ModelHandle {
    ModelKind kind = ModelKind::scripted;
    std::string name;
    std::string endpoint;                     // remote only
    std::optional<ScriptedBehavior> script;   // scripted only
    double default_temperature = 0.0;
    double min_temperature = 0.0;             // floor applied to every request
    std::uint64_t context_chars = 2000000;    // prompt budget before the problem aborts
    int timeout_seconds = 120;
    int max_tokens = 0;                       // 0: omit from requests
    std::string api_key_env;                  // overrides FRICTION_API_KEY when set

    bool operator==(const ModelHandle&) const = default;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct ArithGenSpec {
    int n = 450;
    int digits = 5;
    int base = 10;
    bool decimal_digits_only = false;  // restrict hex operands to digits 0-9

    bool operator==(const ArithGenSpec&) const = default;
};

struct TaskRef {
    std::string name;
    std::string dataset_path;                // one of dataset_path / generator
    std::optional<ArithGenSpec> generator;

    bool operator==(const TaskRef&) const = default;
};

struct RunConfig {
    ModelHandle solver_model;
    std::optional<ModelHandle> feedback_model;  // F3 generator
    std::optional<ModelHandle> judge_model;     // judge-scored tasks only
    FeedbackMechanism feedback_mechanism = FeedbackMechanism::F1;
    int max_iterations = 10;
    SamplingStrategy sampling_strategy = SamplingStrategy::greedy;
    int rejection_candidates = 25;
    std::uint64_t seed = 0;
    double subsample_fraction = 1.0;
    int concurrency_limit = 1;
    TaskRef task;
    int fewshot_k = -1;                  // -1: task default
    bool fewshot_every_iteration = true; // resend exemplars in every prompt

    bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Error categorization
// ---------------------------------------------------------------------------

struct ErrorCategory {
    std::string problem_id;
    CategoryLabel label = CategoryLabel::OTH;
    std::string annotator;
    std::string rationale;

    bool operator==(const ErrorCategory&) const = default;
};

// ---------------------------------------------------------------------------
// Model calls
// ---------------------------------------------------------------------------

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct Completion {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;

    bool operator==(const Completion&) const = default;
};

/// One model call: request parameters plus the returned completions.
struct ChatExchange {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int n = 1;
    bool want_logprobs = false;
    std::vector<Completion> completions;

    bool operator==(const ChatExchange&) const = default;
};

// ---------------------------------------------------------------------------
// Store lines
// ---------------------------------------------------------------------------

/// Terminal marker carried by the last journal line of a problem. Lets the
/// resume path tell a finished trajectory from one cut short by a crash.
struct TrajectoryFinal {
    TrajectoryStatus status = TrajectoryStatus::exhausted;
    std::optional<int> solved_at;
    std::optional<std::string> abort_reason;

    bool operator==(const TrajectoryFinal&) const = default;
};

/// One append-only journal line. `record` is absent only on the rare
/// terminal-only line of a problem that aborted before any model attempt.
struct TrajectoryLogLine {
    std::string run_id;
    std::string problem_id;
    std::optional<IterationRecord> record;
    std::string wall_clock;  // ISO-8601 UTC
    std::uint64_t seq = 0;
    std::optional<TrajectoryFinal> final;

    bool operator==(const TrajectoryLogLine&) const = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks every Problem invariant. Returns the problem with its invariant
/// closure applied (answer inserted into aliases). Throws ValidationError
/// naming the violated invariant otherwise.
Problem validate_problem(Problem p);

/// Throws ValidationError when any Trajectory invariant fails. Checked on
/// every store write and load.
void validate_trajectory(const Trajectory& t);

void validate_run_config(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Canonical JSON codecs (snake_case field names, absent optionals omitted,
// object keys sorted). Serializing then parsing then serializing again is
// byte-identical.
// ---------------------------------------------------------------------------

void to_json(json& j, const Choice& v);
void from_json(const json& j, Choice& v);
void to_json(json& j, const Problem& v);
void from_json(const json& j, Problem& v);
void to_json(json& j, const TokenLogprob& v);
void from_json(const json& j, TokenLogprob& v);
void to_json(json& j, const IterationRecord& v);
void from_json(const json& j, IterationRecord& v);
void to_json(json& j, const Trajectory& v);
void from_json(const json& j, Trajectory& v);
void to_json(json& j, const ScriptedBehavior& v);
void from_json(const json& j, ScriptedBehavior& v);
void to_json(json& j, const ModelHandle& v);
void from_json(const json& j, ModelHandle& v);
void to_json(json& j, const ArithGenSpec& v);
void from_json(const json& j, ArithGenSpec& v);
void to_json(json& j, const TaskRef& v);
void from_json(const json& j, TaskRef& v);
void to_json(json& j, const RunConfig& v);
void from_json(const json& j, RunConfig& v);
void to_json(json& j, const ErrorCategory& v);
void from_json(const json& j, ErrorCategory& v);
void to_json(json& j, const ChatMessage& v);
void from_json(const json& j, ChatMessage& v);
void to_json(json& j, const Completion& v);
void from_json(const json& j, Completion& v);
void to_json(json& j, const ChatExchange& v);
void from_json(const json& j, ChatExchange& v);
void to_json(json& j, const TrajectoryFinal& v);
void from_json(const json& j, TrajectoryFinal& v);
void to_json(json& j, const TrajectoryLogLine& v);
void from_json(const json& j, TrajectoryLogLine& v);

}  // namespace friction

#endif
