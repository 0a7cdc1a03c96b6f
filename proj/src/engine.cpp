#include "friction/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include <omp.h>

#include "friction/errors.hpp"
#include "friction/feedback.hpp"
#include "friction/model_gateway.hpp"
#include "friction/sampling.hpp"
#include "friction/text_norm.hpp"

namespace friction {

ChatExchange call_model_with_retry(const ModelHandle& h, const ChatExchange& req, Rng& rng,
                                   const RetryPolicy& policy) {
    double delay_ms = policy.initial_delay_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return complete(h, req, rng);
        } catch (const ModelError& e) {
            if (!e.retryable() || attempt >= policy.max_attempts) throw;
            if (delay_ms > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(static_cast<long>(delay_ms)));
            delay_ms *= policy.backoff_factor;
        }
    }
}

namespace {

std::size_t prompt_chars(const std::vector<ChatMessage>& messages) {
    std::size_t total = 0;
    for (const auto& m : messages) total += m.content.size();
    return total;
}

Trajectory aborted(const std::string& problem_id, std::vector<IterationRecord> records,
                   const std::string& reason) {
    Trajectory t;
    t.problem_id = problem_id;
    t.records = std::move(records);
    t.status = TrajectoryStatus::aborted;
    t.abort_reason = reason;
    return t;
}

}  // namespace

const char* system_prompt_for(TaskFormat format) {
    switch (format) {
        case TaskFormat::multiple_choice:
            return "You are an expert problem solver. Read the question and the answer choices "
                   "carefully. Reason step by step, then state your final choice on its own "
                   "line in the form 'Answer: <letter>'.";
        case TaskFormat::numeric_boxed:
            return "You are an expert problem solver. Reason step by step, then give your "
                   "final answer inside \\boxed{}.";
        case TaskFormat::open_ended:
            return "You are an expert problem solver. Reason step by step, then state your "
                   "final answer on its own line in the form 'Answer: <answer>'.";
    }
    return "";
}

std::vector<ChatMessage> build_prompt(const Problem& p,
                                      const std::vector<IterationRecord>& history,
                                      const std::vector<Problem>& fewshot) {
    TaskSpec spec = task_spec_for(p.task);
    std::string user;
    if (!fewshot.empty()) {
        user += "Here are example problems with correct answers:\n\n";
        for (const auto& ex : fewshot) {
            user += format_question(ex);
            user += "\nAnswer: " + ex.answer + "\n\n";
        }
        user += "Now solve the following problem.\n\n";
    }
    user += format_question(p);
    if (!history.empty()) {
        user += "\n\nYour previous attempts and the feedback on them:\n";
        for (const auto& r : history) {
            user += "\nIteration " + std::to_string(r.iteration) + ": " + r.parsed_answer + "\n";
            user += "Feedback: " + r.feedback.value_or("") + "\n";
        }
        user += "\nConsider every previous attempt and its feedback, then answer the question "
                "again.";
    }
    return {{"system", system_prompt_for(spec.format)}, {"user", user}};
}

TaskSpec resolve_task_spec(const RunConfig& cfg) {
    TaskSpec spec = task_spec_for(cfg.task.name);
    if (cfg.fewshot_k >= 0) spec.fewshot_k = cfg.fewshot_k;
    if (cfg.judge_model) {
        spec.judge = cfg.judge_model;
        spec.judge_scored = true;
    }
    return spec;
}

Trajectory run_problem(const Problem& p, const RunConfig& cfg,
                       const std::vector<Problem>& dataset, const EngineOptions& opts) {
    const ModelHandle& solver = cfg.solver_model;
    TaskSpec spec = resolve_task_spec(cfg);
    const int K = cfg.max_iterations;

    Rng solver_rng = derive_rng(cfg.seed, p.id, "solver");
    Rng reject_rng = derive_rng(cfg.seed, p.id, "reject");
    Rng feedback_rng = derive_rng(cfg.seed, p.id, "feedback");
    Rng judge_rng = derive_rng(cfg.seed, p.id, "judge");

    std::vector<Problem> fewshot;
    if (spec.fewshot_k > 0 && !dataset.empty())
        fewshot = assemble_fewshot(dataset, p, spec.fewshot_k, spec,
                                   derive_seed(cfg.seed, p.id, "fewshot"));

    bool schedule = cfg.sampling_strategy != SamplingStrategy::greedy;
    bool rejection = cfg.sampling_strategy == SamplingStrategy::temp_schedule_plus_rejection;

    Trajectory traj;
    traj.problem_id = p.id;
    StrategyState strategy;
    strategy.strategy = cfg.sampling_strategy;
    strategy.candidates_n = cfg.rejection_candidates;

    for (int k = 0; k < K; ++k) {
        bool resend_fewshot = cfg.fewshot_every_iteration || k == 0;
        std::vector<ChatMessage> messages =
            build_prompt(p, traj.records, resend_fewshot ? fewshot : std::vector<Problem>{});
        if (prompt_chars(messages) > solver.context_chars)
            return aborted(p.id, std::move(traj.records), "context_overflow");

        double temperature = schedule ? temperature_for(k) : 0.0;
        temperature = std::max(temperature, solver.min_temperature);

        ChatExchange req;
        req.messages = std::move(messages);
        req.temperature = temperature;
        req.n = rejection ? cfg.rejection_candidates : 1;
        req.want_logprobs = (k == 0);

        ChatExchange res;
        try {
            res = call_model_with_retry(solver, req, solver_rng, opts.retry);
        } catch (const ModelError&) {
            return aborted(p.id, std::move(traj.records), "model_unavailable");
        }
        if (res.completions.empty())
            return aborted(p.id, std::move(traj.records), "model_unavailable");

        std::size_t chosen = 0;
        if (rejection && res.completions.size() > 1) {
            std::vector<std::string> texts;
            texts.reserve(res.completions.size());
            for (const auto& c : res.completions) texts.push_back(c.text);
            chosen = rejection_select(texts, strategy.forbidden, spec, reject_rng);
        }
        const Completion& completion = res.completions[chosen];

        IterationRecord rec;
        rec.iteration = k;
        rec.raw_output = completion.text;
        rec.parsed_answer = parse_answer(completion.text, spec);
        rec.temperature = temperature;
        if (k == 0 && completion.token_logprobs) rec.token_logprobs = completion.token_logprobs;

        try {
            rec.correct = evaluate_answer(rec.parsed_answer, p, spec, judge_rng);
        } catch (const ModelError&) {
            return aborted(p.id, std::move(traj.records), "judge_unavailable");
        }

        if (!rec.correct && k + 1 < K) {
            // the feedback prompt sees the failed attempt too
            std::vector<IterationRecord> prefix = traj.records;
            prefix.push_back(rec);
            FeedbackRequest full{p, prefix, cfg.feedback_mechanism, nullptr};
            try {
                std::string fb;
                if (cfg.feedback_mechanism == FeedbackMechanism::F1) {
                    fb = feedback_f1(full);
                } else {
                    full.generator = cfg.feedback_mechanism == FeedbackMechanism::F2
                                         ? &cfg.solver_model
                                         : &*cfg.feedback_model;
                    fb = feedback_f2_f3(full, feedback_rng);
                }
                rec.feedback = mask_and_check(fb, p);
            } catch (const ModelError&) {
                traj.records.push_back(std::move(rec));
                return aborted(p.id, std::move(traj.records), "feedback_unavailable");
            } catch (const FeedbackLeak&) {
                traj.records.push_back(std::move(rec));
                return aborted(p.id, std::move(traj.records), "leak_check");
            }
        }

        strategy.remember(rec.parsed_answer);
        bool correct = rec.correct;
        traj.records.push_back(std::move(rec));
        if (correct) {
            traj.status = TrajectoryStatus::solved;
            traj.solved_at = k;
            validate_trajectory(traj);
            return traj;
        }
    }

    traj.status = TrajectoryStatus::exhausted;
    validate_trajectory(traj);
    return traj;
}

namespace {

RunState run_dataset_impl(const std::vector<Problem>& dataset, const RunConfig& cfg,
                          TrajectorySink& store, const EngineOptions& opts, bool parallel) {
    if (dataset.empty()) throw ValidationError("dataset is empty");
    validate_run_config(cfg);

    std::vector<const Problem*> pending;
    pending.reserve(dataset.size());
    for (const auto& p : dataset)
        if (!store.contains(p.id)) pending.push_back(&p);

    std::atomic<bool> store_failed{false};
    std::exception_ptr store_error;
    auto run_one = [&](const Problem& p) {
        if (store_failed.load(std::memory_order_relaxed)) return;
        Trajectory traj;
        try {
            traj = run_problem(p, cfg, dataset, opts);
        } catch (const std::exception& e) {
            traj = Trajectory{};
            traj.problem_id = p.id;
            traj.status = TrajectoryStatus::aborted;
            traj.abort_reason = std::string("internal_error: ") + e.what();
        }
        try {
            store.append(traj);
        } catch (const StoreError&) {
            bool expected = false;
            if (store_failed.compare_exchange_strong(expected, true))
                store_error = std::current_exception();
        }
    };

    if (parallel) {
        int threads = std::min<int>(cfg.concurrency_limit, static_cast<int>(pending.size()));
        threads = std::max(threads, 1);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (std::size_t i = 0; i < pending.size(); ++i) run_one(*pending[i]);
    } else {
        for (const Problem* p : pending) run_one(*p);
    }

    if (store_error) std::rethrow_exception(store_error);

    RunState state;
    state.config = cfg;
    state.rng_root = cfg.seed;
    state.trajectories = store.trajectories();
    for (const auto& [id, t] : state.trajectories) state.completed.insert(id);
    return state;
}

}  // namespace

RunState run_dataset(const std::vector<Problem>& dataset, const RunConfig& cfg,
                     TrajectorySink& store, const EngineOptions& opts) {
    return run_dataset_impl(dataset, cfg, store, opts, /*parallel=*/true);
}

RunState run_dataset_serial(const std::vector<Problem>& dataset, const RunConfig& cfg,
                            TrajectorySink& store, const EngineOptions& opts) {
    return run_dataset_impl(dataset, cfg, store, opts, /*parallel=*/false);
}

}  // namespace friction
