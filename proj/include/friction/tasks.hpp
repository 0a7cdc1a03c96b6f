#ifndef FRICTION_TASKS_HPP
#define FRICTION_TASKS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "friction/rng.hpp"
#include "friction/types.hpp"

namespace friction {

/// Per-task scoring configuration: answer format, parser, few-shot policy.
struct TaskSpec {
    TaskFormat format = TaskFormat::open_ended;
    int fewshot_k = 5;
    bool categorized = false;  // few-shot exemplars drawn from the problem's category
    bool judge_scored = false;
    std::optional<ModelHandle> judge;
    std::string parser;    // "choice" | "boxed_number" | "answer_line"
    int numeric_base = 10; // base for numeric value comparison
};

/// Resolves a task identifier ("aime", "mmlu_pro", "mult5", "hexmult5", ...)
/// to its spec. Unknown tasks default to open-ended alias scoring.
TaskSpec task_spec_for(const std::string& task_name);

/// Reads a JSONL dataset of Problems, validating each line. Errors carry
/// the 1-based line number.
std::vector<Problem> load_dataset(const std::string& path, const std::string& task);
std::vector<Problem> parse_dataset(const std::string& bytes, const std::string& task);

/// ceil(fraction * m) problems drawn without replacement, deterministic in
/// seed, original relative order preserved.
std::vector<Problem> subsample(const std::vector<Problem>& dataset, double fraction,
                               std::uint64_t seed);

/// k exemplars for p, excluding p itself, category-matched when the task
/// defines categories. Throws DatasetError when the pool is too small.
std::vector<Problem> assemble_fewshot(const std::vector<Problem>& dataset, const Problem& p,
                                      int k, const TaskSpec& spec, std::uint64_t seed);

/// Extracts the answer from raw model output. Total: returns a substring of
/// its input, or "" when nothing matches.
std::string parse_answer(const std::string& raw_output, const TaskSpec& spec);

/// The correctness metric f(parsed, y). Pure; never consults a judge.
bool score(const std::string& parsed, const Problem& p, const TaskSpec& spec);

/// Judge-backed scoring for tasks with sparse aliases: alias match
/// short-circuits (no judge call), a malformed verdict falls back to alias
/// match.
bool judge_score(const std::string& parsed, const Problem& p, const ModelHandle& judge,
                 Rng& rng);

/// score() or judge_score() as the task demands.
bool evaluate_answer(const std::string& parsed, const Problem& p, const TaskSpec& spec,
                     Rng& judge_rng);

/// Question text as shown to the solver (choices appended for
/// multiple-choice tasks).
std::string format_question(const Problem& p);

}  // namespace friction

#endif
