#include "friction/types.hpp"

#include <algorithm>

#include "friction/errors.hpp"

namespace friction {

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

std::string to_string(TrajectoryStatus s) {
    switch (s) {
        case TrajectoryStatus::solved: return "solved";
        case TrajectoryStatus::exhausted: return "exhausted";
        case TrajectoryStatus::aborted: return "aborted";
    }
    return "exhausted";
}

std::string to_string(FeedbackMechanism m) {
    switch (m) {
        case FeedbackMechanism::F1: return "F1";
        case FeedbackMechanism::F2: return "F2";
        case FeedbackMechanism::F3: return "F3";
    }
    return "F1";
}

std::string to_string(SamplingStrategy s) {
    switch (s) {
        case SamplingStrategy::greedy: return "greedy";
        case SamplingStrategy::temp_schedule: return "temp_schedule";
        case SamplingStrategy::temp_schedule_plus_rejection:
            return "temp_schedule_plus_rejection";
    }
    return "greedy";
}

std::string to_string(CategoryLabel l) {
    switch (l) {
        case CategoryLabel::FR: return "FR";
        case CategoryLabel::FQ: return "FQ";
        case CategoryLabel::OTH: return "OTH";
    }
    return "OTH";
}

std::string to_string(ModelKind k) {
    return k == ModelKind::remote ? "remote" : "scripted";
}

std::string to_string(ScriptMode m) {
    switch (m) {
        case ScriptMode::fixed_script: return "fixed_script";
        case ScriptMode::obey_with_probability: return "obey_with_probability";
        case ScriptMode::echo_feedback_trigger: return "echo_feedback_trigger";
    }
    return "fixed_script";
}

template <typename T>
static T enum_from(const std::string& s, std::initializer_list<std::pair<const char*, T>> table,
                   const char* what) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    throw ValidationError(std::string(what) + ": unknown value '" + s + "'");
}

TrajectoryStatus trajectory_status_from_string(const std::string& s) {
    return enum_from<TrajectoryStatus>(s,
                                       {{"solved", TrajectoryStatus::solved},
                                        {"exhausted", TrajectoryStatus::exhausted},
                                        {"aborted", TrajectoryStatus::aborted}},
                                       "status");
}

FeedbackMechanism feedback_mechanism_from_string(const std::string& s) {
    return enum_from<FeedbackMechanism>(s,
                                        {{"F1", FeedbackMechanism::F1},
                                         {"F2", FeedbackMechanism::F2},
                                         {"F3", FeedbackMechanism::F3}},
                                        "feedback_mechanism");
}

SamplingStrategy sampling_strategy_from_string(const std::string& s) {
    return enum_from<SamplingStrategy>(
        s,
        {{"greedy", SamplingStrategy::greedy},
         {"temp_schedule", SamplingStrategy::temp_schedule},
         {"temp_schedule_plus_rejection", SamplingStrategy::temp_schedule_plus_rejection}},
        "sampling_strategy");
}

CategoryLabel category_label_from_string(const std::string& s) {
    return enum_from<CategoryLabel>(
        s, {{"FR", CategoryLabel::FR}, {"FQ", CategoryLabel::FQ}, {"OTH", CategoryLabel::OTH}},
        "label");
}

ModelKind model_kind_from_string(const std::string& s) {
    return enum_from<ModelKind>(
        s, {{"remote", ModelKind::remote}, {"scripted", ModelKind::scripted}}, "kind");
}

ScriptMode script_mode_from_string(const std::string& s) {
    return enum_from<ScriptMode>(
        s,
        {{"fixed_script", ScriptMode::fixed_script},
         {"obey_with_probability", ScriptMode::obey_with_probability},
         {"echo_feedback_trigger", ScriptMode::echo_feedback_trigger}},
        "mode");
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

Problem validate_problem(Problem p) {
    if (p.id.empty()) throw ValidationError("problem id must be non-empty");
    if (p.answer.empty()) throw ValidationError("answer must be non-empty (id=" + p.id + ")");
    if (!p.choices.empty()) {
        bool found = std::any_of(p.choices.begin(), p.choices.end(),
                                 [&](const Choice& c) { return c.label == p.answer; });
        if (!found)
            throw ValidationError("answer must be a choice label (id=" + p.id + ", answer=" +
                                  p.answer + ")");
        std::set<std::string> labels;
        for (const auto& c : p.choices) {
            if (c.label.empty()) throw ValidationError("choice label empty (id=" + p.id + ")");
            if (!labels.insert(c.label).second)
                throw ValidationError("duplicate choice label (id=" + p.id + ")");
        }
    }
    // invariant closure: aliases always contains the answer, never empties
    p.aliases.erase("");
    p.aliases.insert(p.answer);
    return p;
}

void validate_trajectory(const Trajectory& t) {
    if (t.problem_id.empty()) throw ValidationError("trajectory problem_id empty");
    if (t.records.empty() && t.status != TrajectoryStatus::aborted)
        throw ValidationError("trajectory records empty (" + t.problem_id + ")");
    int expect = 0;
    for (const auto& r : t.records) {
        if (r.iteration != expect)
            throw ValidationError("iterations not strictly increasing from 0 (" + t.problem_id +
                                  ")");
        if (r.temperature < 0.0)
            throw ValidationError("negative temperature (" + t.problem_id + ")");
        ++expect;
    }
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        bool last = i + 1 == t.records.size();
        if (r.correct && !last)
            throw ValidationError("correct record is not the last (" + t.problem_id + ")");
        if (r.correct && r.feedback)
            throw ValidationError("correct record carries feedback (" + t.problem_id + ")");
        if (!last && !r.feedback)
            throw ValidationError("followed incorrect record lacks feedback (" + t.problem_id +
                                  ", iteration " + std::to_string(r.iteration) + ")");
        // the last record has no feedback, except that an abort may cut the
        // loop between feedback generation and the next attempt
        if (last && r.feedback && t.status != TrajectoryStatus::aborted)
            throw ValidationError("final record carries feedback (" + t.problem_id + ")");
    }
    bool solved = t.status == TrajectoryStatus::solved;
    if (solved != t.solved_at.has_value())
        throw ValidationError("solved_at set iff status=solved (" + t.problem_id + ")");
    if (solved) {
        if (t.records.empty() || !t.records.back().correct)
            throw ValidationError("solved trajectory must end with a correct record (" +
                                  t.problem_id + ")");
        if (*t.solved_at != t.records.back().iteration)
            throw ValidationError("solved_at must equal the correct record's iteration (" +
                                  t.problem_id + ")");
    } else if (!t.records.empty() && t.records.back().correct) {
        throw ValidationError("unsolved trajectory ends with a correct record (" + t.problem_id +
                              ")");
    }
    if (t.abort_reason.has_value() && t.status != TrajectoryStatus::aborted)
        throw ValidationError("abort_reason set on non-aborted trajectory (" + t.problem_id + ")");
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (cfg.rejection_candidates < 1) throw ValidationError("rejection_candidates must be >= 1");
    if (!(cfg.subsample_fraction > 0.0 && cfg.subsample_fraction <= 1.0))
        throw ValidationError("subsample_fraction must be in (0,1]");
    if (cfg.concurrency_limit < 1) throw ValidationError("concurrency_limit must be >= 1");
    if (cfg.task.name.empty()) throw ValidationError("task name must be set");
    if (cfg.task.dataset_path.empty() == !cfg.task.generator.has_value())
        throw ValidationError("task needs exactly one of dataset_path / generator");
    auto check_handle = [](const ModelHandle& h, const char* which) {
        bool has_endpoint = !h.endpoint.empty();
        bool has_script = h.script.has_value();
        if (h.kind == ModelKind::remote && (!has_endpoint || has_script))
            throw ValidationError(std::string(which) + ": remote handle needs endpoint only");
        if (h.kind == ModelKind::scripted && (has_endpoint || !has_script))
            throw ValidationError(std::string(which) + ": scripted handle needs script only");
        if (has_script) {
            const auto& s = *h.script;
            switch (s.mode) {
                case ScriptMode::fixed_script:
                    if (s.answers_by_iteration.empty())
                        throw ValidationError(std::string(which) +
                                              ": fixed_script needs answers_by_iteration");
                    break;
                case ScriptMode::obey_with_probability:
                    if (!s.obey_probability || *s.obey_probability < 0.0 ||
                        *s.obey_probability > 1.0)
                        throw ValidationError(std::string(which) +
                                              ": obey_probability must be in [0,1]");
                    if (s.initial_correct_probability &&
                        (*s.initial_correct_probability < 0.0 ||
                         *s.initial_correct_probability > 1.0))
                        throw ValidationError(std::string(which) +
                                              ": initial_correct_probability must be in [0,1]");
                    break;
                case ScriptMode::echo_feedback_trigger:
                    if (!s.trigger_token || s.trigger_token->empty())
                        throw ValidationError(std::string(which) +
                                              ": echo_feedback_trigger needs trigger_token");
                    break;
            }
        }
    };
    check_handle(cfg.solver_model, "solver_model");
    if (cfg.feedback_model) check_handle(*cfg.feedback_model, "feedback_model");
    if (cfg.feedback_mechanism == FeedbackMechanism::F3) {
        if (!cfg.feedback_model) throw ValidationError("F3 requires feedback_model");
        if (cfg.feedback_model->name == cfg.solver_model.name &&
            cfg.feedback_model->endpoint == cfg.solver_model.endpoint &&
            cfg.feedback_model->script == cfg.solver_model.script)
            throw ValidationError("F3 feedback generator must differ from the solver");
    }
}

// ---------------------------------------------------------------------------
// JSON codecs
// ---------------------------------------------------------------------------

void to_json(json& j, const Choice& v) {
    j = json{{"label", v.label}, {"text", v.text}};
}

void from_json(const json& j, Choice& v) {
    j.at("label").get_to(v.label);
    j.at("text").get_to(v.text);
}

void to_json(json& j, const Problem& v) {
    j = json{{"id", v.id},
             {"task", v.task},
             {"question", v.question},
             {"answer", v.answer},
             {"aliases", v.aliases}};
    if (!v.choices.empty()) j["choices"] = v.choices;
    if (v.solution_steps) j["solution_steps"] = *v.solution_steps;
    if (v.category) j["category"] = *v.category;
    if (!v.metadata.empty()) j["metadata"] = v.metadata;
}

void from_json(const json& j, Problem& v) {
    v = Problem{};
    j.at("id").get_to(v.id);
    j.at("task").get_to(v.task);
    j.at("question").get_to(v.question);
    j.at("answer").get_to(v.answer);
    if (j.contains("aliases")) j.at("aliases").get_to(v.aliases);
    if (j.contains("choices")) j.at("choices").get_to(v.choices);
    if (j.contains("solution_steps")) v.solution_steps = j.at("solution_steps").get<std::string>();
    if (j.contains("category")) v.category = j.at("category").get<std::string>();
    if (j.contains("metadata")) j.at("metadata").get_to(v.metadata);
}

void to_json(json& j, const TokenLogprob& v) {
    j = json{{"token", v.token}, {"logprob", v.logprob}};
}

void from_json(const json& j, TokenLogprob& v) {
    j.at("token").get_to(v.token);
    j.at("logprob").get_to(v.logprob);
}

void to_json(json& j, const IterationRecord& v) {
    j = json{{"iteration", v.iteration},
             {"raw_output", v.raw_output},
             {"parsed_answer", v.parsed_answer},
             {"correct", v.correct},
             {"temperature", v.temperature}};
    if (v.feedback) j["feedback"] = *v.feedback;
    if (v.token_logprobs) j["token_logprobs"] = *v.token_logprobs;
}

void from_json(const json& j, IterationRecord& v) {
    v = IterationRecord{};
    j.at("iteration").get_to(v.iteration);
    j.at("raw_output").get_to(v.raw_output);
    j.at("parsed_answer").get_to(v.parsed_answer);
    j.at("correct").get_to(v.correct);
    j.at("temperature").get_to(v.temperature);
    if (j.contains("feedback")) v.feedback = j.at("feedback").get<std::string>();
    if (j.contains("token_logprobs"))
        v.token_logprobs = j.at("token_logprobs").get<std::vector<TokenLogprob>>();
}

void to_json(json& j, const Trajectory& v) {
    j = json{{"problem_id", v.problem_id},
             {"records", v.records},
             {"status", to_string(v.status)}};
    if (v.solved_at) j["solved_at"] = *v.solved_at;
    if (v.abort_reason) j["abort_reason"] = *v.abort_reason;
}

void from_json(const json& j, Trajectory& v) {
    v = Trajectory{};
    j.at("problem_id").get_to(v.problem_id);
    j.at("records").get_to(v.records);
    v.status = trajectory_status_from_string(j.at("status").get<std::string>());
    if (j.contains("solved_at")) v.solved_at = j.at("solved_at").get<int>();
    if (j.contains("abort_reason")) v.abort_reason = j.at("abort_reason").get<std::string>();
}

void to_json(json& j, const ScriptedBehavior& v) {
    j = json{{"mode", to_string(v.mode)}};
    if (!v.answers_by_iteration.empty()) j["answers_by_iteration"] = v.answers_by_iteration;
    if (v.obey_probability) j["obey_probability"] = *v.obey_probability;
    if (v.initial_correct_probability)
        j["initial_correct_probability"] = *v.initial_correct_probability;
    if (v.trigger_token) j["trigger_token"] = *v.trigger_token;
    if (!v.token_probabilities.empty()) j["token_probabilities"] = v.token_probabilities;
}

void from_json(const json& j, ScriptedBehavior& v) {
    v = ScriptedBehavior{};
    v.mode = script_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("answers_by_iteration"))
        j.at("answers_by_iteration").get_to(v.answers_by_iteration);
    if (j.contains("obey_probability")) v.obey_probability = j.at("obey_probability").get<double>();
    if (j.contains("initial_correct_probability"))
        v.initial_correct_probability = j.at("initial_correct_probability").get<double>();
    if (j.contains("trigger_token")) v.trigger_token = j.at("trigger_token").get<std::string>();
    if (j.contains("token_probabilities")) j.at("token_probabilities").get_to(v.token_probabilities);
}

void to_json(json& j, const ModelHandle& v) {
    j = json{{"kind", to_string(v.kind)}, {"name", v.name}};
    if (!v.endpoint.empty()) j["endpoint"] = v.endpoint;
    if (v.script) j["script"] = *v.script;
    if (v.default_temperature != 0.0) j["default_temperature"] = v.default_temperature;
    if (v.min_temperature != 0.0) j["min_temperature"] = v.min_temperature;
    if (v.context_chars != ModelHandle{}.context_chars) j["context_chars"] = v.context_chars;
    if (v.timeout_seconds != ModelHandle{}.timeout_seconds)
        j["timeout_seconds"] = v.timeout_seconds;
    if (v.max_tokens > 0) j["max_tokens"] = v.max_tokens;
    if (!v.api_key_env.empty()) j["api_key_env"] = v.api_key_env;
}

void from_json(const json& j, ModelHandle& v) {
    v = ModelHandle{};
    v.kind = model_kind_from_string(j.at("kind").get<std::string>());
    j.at("name").get_to(v.name);
    if (j.contains("endpoint")) j.at("endpoint").get_to(v.endpoint);
    if (j.contains("script")) v.script = j.at("script").get<ScriptedBehavior>();
    if (j.contains("default_temperature")) j.at("default_temperature").get_to(v.default_temperature);
    if (j.contains("min_temperature")) j.at("min_temperature").get_to(v.min_temperature);
    if (j.contains("context_chars")) j.at("context_chars").get_to(v.context_chars);
    if (j.contains("timeout_seconds")) j.at("timeout_seconds").get_to(v.timeout_seconds);
    if (j.contains("max_tokens")) j.at("max_tokens").get_to(v.max_tokens);
    if (j.contains("api_key_env")) j.at("api_key_env").get_to(v.api_key_env);
}

void to_json(json& j, const ArithGenSpec& v) {
    j = json{{"n", v.n}, {"digits", v.digits}, {"base", v.base}};
    if (v.decimal_digits_only) j["decimal_digits_only"] = true;
}

void from_json(const json& j, ArithGenSpec& v) {
    v = ArithGenSpec{};
    j.at("n").get_to(v.n);
    j.at("digits").get_to(v.digits);
    j.at("base").get_to(v.base);
    if (j.contains("decimal_digits_only")) j.at("decimal_digits_only").get_to(v.decimal_digits_only);
}

void to_json(json& j, const TaskRef& v) {
    j = json{{"name", v.name}};
    if (!v.dataset_path.empty()) j["dataset_path"] = v.dataset_path;
    if (v.generator) j["generator"] = *v.generator;
}

void from_json(const json& j, TaskRef& v) {
    v = TaskRef{};
    j.at("name").get_to(v.name);
    if (j.contains("dataset_path")) j.at("dataset_path").get_to(v.dataset_path);
    if (j.contains("generator")) v.generator = j.at("generator").get<ArithGenSpec>();
}

void to_json(json& j, const RunConfig& v) {
    j = json{{"solver_model", v.solver_model},
             {"feedback_mechanism", to_string(v.feedback_mechanism)},
             {"max_iterations", v.max_iterations},
             {"sampling_strategy", to_string(v.sampling_strategy)},
             {"rejection_candidates", v.rejection_candidates},
             {"seed", v.seed},
             {"subsample_fraction", v.subsample_fraction},
             {"concurrency_limit", v.concurrency_limit},
             {"task", v.task}};
    if (v.feedback_model) j["feedback_model"] = *v.feedback_model;
    if (v.judge_model) j["judge_model"] = *v.judge_model;
    if (v.fewshot_k >= 0) j["fewshot_k"] = v.fewshot_k;
    if (!v.fewshot_every_iteration) j["fewshot_every_iteration"] = false;
}

void from_json(const json& j, RunConfig& v) {
    v = RunConfig{};
    j.at("solver_model").get_to(v.solver_model);
    if (j.contains("feedback_model")) v.feedback_model = j.at("feedback_model").get<ModelHandle>();
    if (j.contains("judge_model")) v.judge_model = j.at("judge_model").get<ModelHandle>();
    v.feedback_mechanism =
        feedback_mechanism_from_string(j.at("feedback_mechanism").get<std::string>());
    if (j.contains("max_iterations")) j.at("max_iterations").get_to(v.max_iterations);
    if (j.contains("sampling_strategy"))
        v.sampling_strategy = sampling_strategy_from_string(j.at("sampling_strategy").get<std::string>());
    if (j.contains("rejection_candidates")) j.at("rejection_candidates").get_to(v.rejection_candidates);
    if (j.contains("seed")) j.at("seed").get_to(v.seed);
    if (j.contains("subsample_fraction")) j.at("subsample_fraction").get_to(v.subsample_fraction);
    if (j.contains("concurrency_limit")) j.at("concurrency_limit").get_to(v.concurrency_limit);
    j.at("task").get_to(v.task);
    if (j.contains("fewshot_k")) j.at("fewshot_k").get_to(v.fewshot_k);
    if (j.contains("fewshot_every_iteration"))
        j.at("fewshot_every_iteration").get_to(v.fewshot_every_iteration);
}

void to_json(json& j, const ErrorCategory& v) {
    j = json{{"problem_id", v.problem_id},
             {"label", to_string(v.label)},
             {"annotator", v.annotator},
             {"rationale", v.rationale}};
}

void from_json(const json& j, ErrorCategory& v) {
    v = ErrorCategory{};
    j.at("problem_id").get_to(v.problem_id);
    v.label = category_label_from_string(j.at("label").get<std::string>());
    j.at("annotator").get_to(v.annotator);
    j.at("rationale").get_to(v.rationale);
}

void to_json(json& j, const ChatMessage& v) {
    j = json{{"role", v.role}, {"content", v.content}};
}

void from_json(const json& j, ChatMessage& v) {
    j.at("role").get_to(v.role);
    j.at("content").get_to(v.content);
}

void to_json(json& j, const Completion& v) {
    j = json{{"text", v.text}};
    if (v.token_logprobs) j["token_logprobs"] = *v.token_logprobs;
}

void from_json(const json& j, Completion& v) {
    v = Completion{};
    j.at("text").get_to(v.text);
    if (j.contains("token_logprobs"))
        v.token_logprobs = j.at("token_logprobs").get<std::vector<TokenLogprob>>();
}

void to_json(json& j, const ChatExchange& v) {
    j = json{{"messages", v.messages},
             {"temperature", v.temperature},
             {"n", v.n},
             {"want_logprobs", v.want_logprobs},
             {"completions", v.completions}};
}

void from_json(const json& j, ChatExchange& v) {
    v = ChatExchange{};
    j.at("messages").get_to(v.messages);
    j.at("temperature").get_to(v.temperature);
    j.at("n").get_to(v.n);
    j.at("want_logprobs").get_to(v.want_logprobs);
    j.at("completions").get_to(v.completions);
}

void to_json(json& j, const TrajectoryFinal& v) {
    j = json{{"status", to_string(v.status)}};
    if (v.solved_at) j["solved_at"] = *v.solved_at;
    if (v.abort_reason) j["abort_reason"] = *v.abort_reason;
}

void from_json(const json& j, TrajectoryFinal& v) {
    v = TrajectoryFinal{};
    v.status = trajectory_status_from_string(j.at("status").get<std::string>());
    if (j.contains("solved_at")) v.solved_at = j.at("solved_at").get<int>();
    if (j.contains("abort_reason")) v.abort_reason = j.at("abort_reason").get<std::string>();
}

void to_json(json& j, const TrajectoryLogLine& v) {
    j = json{{"run_id", v.run_id},
             {"problem_id", v.problem_id},
             {"wall_clock", v.wall_clock},
             {"seq", v.seq}};
    if (v.record) j["record"] = *v.record;
    if (v.final) j["final"] = *v.final;
}

void from_json(const json& j, TrajectoryLogLine& v) {
    v = TrajectoryLogLine{};
    j.at("run_id").get_to(v.run_id);
    j.at("problem_id").get_to(v.problem_id);
    j.at("wall_clock").get_to(v.wall_clock);
    j.at("seq").get_to(v.seq);
    if (j.contains("record")) v.record = j.at("record").get<IterationRecord>();
    if (j.contains("final")) v.final = j.at("final").get<TrajectoryFinal>();
}

}  // namespace friction
