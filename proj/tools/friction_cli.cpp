// friction: iterative solver/feedback experiment harness.
//
// Subcommands:
//   run        execute a configured experiment, resumable per problem
//   report     accuracy curve, summary, bins and cross-run overlap
//   categorize label unsolved trajectories FR/FQ/OTH with an annotator model
//   gen-arith  emit a synthetic multiplication dataset

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "friction/analysis.hpp"
#include "friction/config.hpp"
#include "friction/engine.hpp"
#include "friction/errors.hpp"
#include "friction/reports.hpp"
#include "friction/store.hpp"
#include "friction/synthetic_arith.hpp"
#include "friction/tasks.hpp"

namespace fs = std::filesystem;
using namespace friction;

namespace {

std::map<std::string, Problem> load_run_problems(const std::string& run_dir) {
    std::string path = run_dir + "/dataset.jsonl";
    std::map<std::string, Problem> out;
    for (auto& p : load_dataset(path, "")) out.emplace(p.id, std::move(p));
    return out;
}

std::vector<Trajectory> load_run_trajectories(const std::string& run_dir) {
    return load_trajectories(run_dir + "/trajectories.jsonl");
}

int run_K_from_summary(const std::string& run_dir, const std::vector<Trajectory>& trajs) {
    std::string path = run_dir + "/summary.json";
    if (fs::exists(path)) {
        try {
            return json::parse(read_text_file(path)).at("K").get<int>();
        } catch (const std::exception&) { /* fall through */ }
    }
    int K = 1;
    for (const auto& t : trajs)
        K = std::max(K, static_cast<int>(t.records.size()));
    return K;
}

int cmd_run(const std::string& config_path, std::string out_dir, bool resume) {
    LoadedConfig loaded = load_config(config_path);
    ResolvedDataset dataset = resolve_dataset(loaded.config);
    std::string run_id = run_id_for(loaded.bytes, dataset.bytes);
    std::string config_hash = hash_hex(loaded.bytes);
    if (out_dir.empty()) out_dir = "runs/" + run_id;

    std::vector<Problem> problems =
        subsample(dataset.problems, loaded.config.subsample_fraction, loaded.config.seed);

    fs::create_directories(out_dir);
    write_text_file(out_dir + "/config.json", loaded.bytes);
    write_text_file(out_dir + "/dataset.jsonl", problems_to_jsonl(problems));

    auto store = RunStore::open(out_dir, run_id, resume);
    std::cerr << "run " << run_id << ": " << problems.size() << " problems, K="
              << loaded.config.max_iterations << ", out=" << out_dir << "\n";

    RunState state = run_dataset(problems, loaded.config, *store);

    std::vector<std::string> id_order;
    id_order.reserve(problems.size());
    for (const auto& p : problems) id_order.push_back(p.id);
    store->finalize(id_order);

    std::vector<Trajectory> trajs;
    trajs.reserve(state.trajectories.size());
    for (const auto& [id, t] : state.trajectories) trajs.push_back(t);
    AccuracyCurve curve = accuracy_curve(trajs, loaded.config.max_iterations);
    RunCounts counts = count_statuses(trajs);
    json summary = summary_json(run_id, config_hash, trajs.size(), loaded.config.max_iterations,
                                curve, counts, std::nullopt);
    write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");
    write_text_file(out_dir + "/accuracy_curve.csv", accuracy_curve_csv(curve));

    std::cout << summary.dump(2) << "\n";
    return counts.aborted > 0 ? 2 : 0;
}

int cmd_report(const std::string& run_dir, const std::vector<std::string>& overlap_dirs,
               const std::string& bin_metric, int bins, bool quantile) {
    std::vector<Trajectory> trajs = load_run_trajectories(run_dir);
    if (trajs.empty()) throw AnalysisError("empty run: " + run_dir);
    int K = run_K_from_summary(run_dir, trajs);
    AccuracyCurve curve = accuracy_curve(trajs, K);
    write_text_file(run_dir + "/accuracy_curve.csv", accuracy_curve_csv(curve));

    std::optional<CategoryDistribution> dist;
    std::string categories_path = run_dir + "/categories.jsonl";
    if (fs::exists(categories_path)) {
        std::vector<ErrorCategory> labels;
        std::istringstream in(read_text_file(categories_path));
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) labels.push_back(json::parse(line).get<ErrorCategory>());
        if (!labels.empty()) dist = category_distribution(labels);
    }

    std::string run_id = "unknown";
    std::string config_hash = "unknown";
    std::string summary_path = run_dir + "/summary.json";
    if (fs::exists(summary_path)) {
        json old = json::parse(read_text_file(summary_path));
        run_id = old.value("run_id", run_id);
        config_hash = old.value("config_hash", config_hash);
    }
    RunCounts counts = count_statuses(trajs);
    json summary = summary_json(run_id, config_hash, trajs.size(), K, curve, counts, dist);
    write_text_file(summary_path, summary.dump(2) + "\n");

    if (!bin_metric.empty()) {
        auto problems = load_run_problems(run_dir);
        auto stats = bin_by_metric(trajs, problems, bin_metric, bins, quantile);
        write_text_file(run_dir + "/bins.csv", bins_csv(stats));
    }

    if (!overlap_dirs.empty()) {
        auto failures = [](const std::vector<Trajectory>& ts) {
            std::set<std::string> out;
            for (const auto& t : ts)
                if (t.status != TrajectoryStatus::solved) out.insert(t.problem_id);
            return out;
        };
        std::vector<std::set<std::string>> sets{failures(trajs)};
        std::vector<std::string> names{run_dir};
        for (const auto& dir : overlap_dirs) {
            sets.push_back(failures(load_run_trajectories(dir)));
            names.push_back(dir);
        }
        OverlapReport report = overlap_ratio(sets);
        write_text_file(run_dir + "/overlap.json", overlap_json(report, names).dump(2) + "\n");
    }

    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_categorize(const std::string& run_dir, const std::string& annotator_path,
                   std::uint64_t seed) {
    ModelHandle annotator = load_model_handle(annotator_path);
    std::vector<Trajectory> trajs = load_run_trajectories(run_dir);
    std::vector<Trajectory> unsolved;
    for (auto& t : trajs)
        if (t.status == TrajectoryStatus::exhausted) unsolved.push_back(std::move(t));

    std::string out_path = run_dir + "/categories.jsonl";
    if (unsolved.empty()) {
        std::cerr << "warning: no unsolved trajectories in " << run_dir
                  << "; writing empty categories file\n";
        write_text_file(out_path, "");
        return 0;
    }
    auto problems = load_run_problems(run_dir);
    std::vector<ErrorCategory> labels = categorize_errors(unsolved, problems, annotator, seed);
    std::string lines;
    for (const auto& l : labels) {
        lines += json(l).dump();
        lines += '\n';
    }
    write_text_file(out_path, lines);
    CategoryDistribution dist = category_distribution(labels);
    std::cerr << "categorized " << labels.size() << " trajectories: FR=" << dist.fr
              << " FQ=" << dist.fq << " OTH=" << dist.oth << "\n";
    return 0;
}

int cmd_gen_arith(int n, int digits, int base, std::uint64_t seed, const std::string& out_path,
                  bool decimal_digits_only) {
    ArithGenSpec spec;
    spec.n = n;
    spec.digits = digits;
    spec.base = base;
    spec.decimal_digits_only = decimal_digits_only;
    std::vector<Problem> problems = gen_mult_dataset(spec, seed);
    write_text_file(out_path, problems_to_jsonl(problems));
    std::cerr << "wrote " << problems.size() << " problems to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"iterative solver/feedback experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool resume = false;
    auto* run = app.add_subcommand("run", "execute an experiment");
    run->add_option("--config", config_path, "run configuration (JSON)")->required();
    run->add_option("--out", out_dir, "run directory (default runs/<run_id>)");
    run->add_flag("--resume", resume, "continue an interrupted run");

    std::string report_dir;
    std::vector<std::string> overlap_dirs;
    std::string bin_metric;
    int bins = 5;
    bool quantile = false;
    auto* report = app.add_subcommand("report", "emit metrics for a finished run");
    report->add_option("run_dir", report_dir, "run directory")->required();
    report->add_option("--overlap", overlap_dirs, "other run directories for failure overlap");
    report->add_option("--bin-metric", bin_metric,
                       "metadata key or 'confidence' to bin problems by");
    report->add_option("--bins", bins, "number of bins");
    report->add_flag("--quantile", quantile, "equal-count bins instead of equal-width");

    std::string cat_dir;
    std::string annotator_path;
    std::uint64_t cat_seed = 0;
    auto* categorize = app.add_subcommand("categorize", "label unsolved trajectories");
    categorize->add_option("run_dir", cat_dir, "run directory")->required();
    categorize->add_option("--annotator", annotator_path, "annotator model handle (JSON)")
        ->required();
    categorize->add_option("--seed", cat_seed, "annotator RNG seed");

    int n = 450;
    int digits = 5;
    int base = 10;
    std::uint64_t seed = 0;
    std::string arith_out;
    bool decimal_digits_only = false;
    auto* gen = app.add_subcommand("gen-arith", "emit a synthetic multiplication dataset");
    gen->add_option("--n", n, "problem count");
    gen->add_option("--digits", digits, "digits per operand");
    gen->add_option("--base", base, "10 or 16");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", arith_out, "output JSONL path")->required();
    gen->add_flag("--decimal-digits-only", decimal_digits_only,
                  "restrict base-16 operands to digits 0-9");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, resume);
        if (report->parsed())
            return cmd_report(report_dir, overlap_dirs, bin_metric, bins, quantile);
        if (categorize->parsed()) return cmd_categorize(cat_dir, annotator_path, cat_seed);
        if (gen->parsed())
            return cmd_gen_arith(n, digits, base, seed, arith_out, decimal_digits_only);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
