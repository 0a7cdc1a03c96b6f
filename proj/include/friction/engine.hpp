#ifndef FRICTION_ENGINE_HPP
#define FRICTION_ENGINE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "friction/store.hpp"
#include "friction/tasks.hpp"
#include "friction/types.hpp"

namespace friction {

/// Transient model failures are retried this many times with exponential
/// backoff before the problem (and only that problem) aborts.
struct RetryPolicy {
    int max_attempts = 5;
    int initial_delay_ms = 500;
    double backoff_factor = 2.0;
};

struct EngineOptions {
    RetryPolicy retry;
};

struct RunState {
    RunConfig config;
    std::map<std::string, Trajectory> trajectories;
    std::set<std::string> completed;
    std::uint64_t rng_root = 0;
};

/// One model call under the retry policy: retryable failures back off
/// exponentially until the attempt budget runs out.
ChatExchange call_model_with_retry(const ModelHandle& h, const ChatExchange& req, Rng& rng,
                                   const RetryPolicy& policy);

/// Solver prompt for iteration k: system message for the task format, then
/// few-shot exemplars, the question, and one labeled block per prior
/// (answer, feedback) pair, in order. Byte-identical for identical inputs.
std::vector<ChatMessage> build_prompt(const Problem& p,
                                      const std::vector<IterationRecord>& history,
                                      const std::vector<Problem>& fewshot);

const char* system_prompt_for(TaskFormat format);

/// Task spec for a run: task defaults plus the config's few-shot and judge
/// overrides.
TaskSpec resolve_task_spec(const RunConfig& cfg);

/// Runs the iterative improvement loop for one problem: attempt, score,
/// feedback on failure, retry, for up to max_iterations or until the first
/// correct answer. All randomness comes from streams derived from
/// (cfg.seed, p.id), so results do not depend on scheduling order.
/// `dataset` is the exemplar pool for few-shot assembly.
Trajectory run_problem(const Problem& p, const RunConfig& cfg,
                       const std::vector<Problem>& dataset, const EngineOptions& opts = {});

/// Runs every problem not already present in the store, appending one
/// trajectory per problem. OpenMP-parallel over problems with up to
/// concurrency_limit in-flight model calls.
RunState run_dataset(const std::vector<Problem>& dataset, const RunConfig& cfg,
                     TrajectorySink& store, const EngineOptions& opts = {});

/// Serial reference implementation; persisted content is identical to
/// run_dataset's for scripted models and a fixed seed.
RunState run_dataset_serial(const std::vector<Problem>& dataset, const RunConfig& cfg,
                            TrajectorySink& store, const EngineOptions& opts = {});

}  // namespace friction

#endif
