// Compares the serial reference dataset runner against the OpenMP-parallel
// one on a scripted workload, plus the masking filter's throughput.
//
//   ./bench/friction_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include "friction/engine.hpp"
#include "friction/feedback.hpp"
#include "friction/store.hpp"
#include "friction/types.hpp"

using namespace friction;

namespace {

std::vector<Problem> echo_problems(int m) {
    std::vector<Problem> out;
    out.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        Problem p;
        p.id = "echo-" + std::to_string(i);
        p.task = "echo";
        p.question = "State the target token. TARGET: tok-" + std::to_string(i);
        p.answer = "tok-" + std::to_string(i);
        out.push_back(validate_problem(std::move(p)));
    }
    return out;
}

RunConfig obey_config(int concurrency) {
    RunConfig cfg;
    cfg.solver_model.kind = ModelKind::scripted;
    cfg.solver_model.name = "obey";
    ScriptedBehavior script;
    script.mode = ScriptMode::obey_with_probability;
    script.obey_probability = 0.3;
    script.initial_correct_probability = 0.4;
    cfg.solver_model.script = script;
    cfg.feedback_mechanism = FeedbackMechanism::F1;
    cfg.max_iterations = 10;
    cfg.seed = 42;
    cfg.concurrency_limit = concurrency;
    cfg.fewshot_k = 0;
    cfg.task.name = "echo";
    cfg.task.dataset_path = "unused";
    return cfg;
}

void bench_run_dataset_serial(benchmark::State& state) {
    auto problems = echo_problems(static_cast<int>(state.range(0)));
    RunConfig cfg = obey_config(1);
    for (auto _ : state) {
        MemoryStore store;
        RunState result = run_dataset_serial(problems, cfg, store);
        benchmark::DoNotOptimize(result.trajectories.size());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bench_run_dataset_parallel(benchmark::State& state) {
    auto problems = echo_problems(static_cast<int>(state.range(0)));
    RunConfig cfg = obey_config(static_cast<int>(state.range(1)));
    for (auto _ : state) {
        MemoryStore store;
        RunState result = run_dataset(problems, cfg, store);
        benchmark::DoNotOptimize(result.trajectories.size());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bench_mask_feedback(benchmark::State& state) {
    Problem p;
    p.id = "m";
    p.task = "math500";
    p.question = "q";
    p.answer = "242720910";
    p = validate_problem(std::move(p));
    std::string text =
        "The sum comes out to 242720910 after carrying; check \\boxed{242720910} and note "
        "that 242,720,910 also appears with grouping, while 2427209100 must stay visible.";
    for (auto _ : state) {
        std::string masked = mask_feedback(text, p);
        benchmark::DoNotOptimize(masked.size());
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}

}  // namespace

BENCHMARK(bench_run_dataset_serial)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_run_dataset_parallel)
    ->Args({500, 2})
    ->Args({500, 4})
    ->Args({500, 8})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bench_mask_feedback);

BENCHMARK_MAIN();
