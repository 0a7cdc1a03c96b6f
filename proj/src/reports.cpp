#include "friction/reports.hpp"

#include <fstream>
#include <sstream>

#include "friction/errors.hpp"

namespace friction {

namespace {

// shortest round-trip representation, same as the JSON encoder's
std::string num(double v) { return json(v).dump(); }

}  // namespace

std::string accuracy_curve_csv(const AccuracyCurve& curve) {
    std::string out = "iteration,accuracy,stderr\n";
    for (std::size_t k = 0; k < curve.acc.size(); ++k)
        out += std::to_string(k) + "," + num(curve.acc[k]) + "," + num(curve.stderrs[k]) + "\n";
    return out;
}

std::string bins_csv(const std::vector<BinStat>& bins) {
    std::string out =
        "bin,lo,hi,n,initial_acc,final_acc,delta,stderr_initial,stderr_final\n";
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const BinStat& b = bins[i];
        out += std::to_string(i) + "," + num(b.lo) + "," + num(b.hi) + "," +
               std::to_string(b.n) + "," + num(b.initial_acc) + "," + num(b.final_acc) + "," +
               num(b.delta) + "," + num(b.stderr_initial) + "," + num(b.stderr_final) + "\n";
    }
    return out;
}

RunCounts count_statuses(const std::vector<Trajectory>& trajectories) {
    RunCounts counts;
    for (const auto& t : trajectories) {
        switch (t.status) {
            case TrajectoryStatus::solved: ++counts.solved; break;
            case TrajectoryStatus::exhausted: ++counts.exhausted; break;
            case TrajectoryStatus::aborted: ++counts.aborted; break;
        }
    }
    return counts;
}

json summary_json(const std::string& run_id, const std::string& config_hash, std::size_t m,
                  int K, const AccuracyCurve& curve, const RunCounts& counts,
                  const std::optional<CategoryDistribution>& categories) {
    json j{{"run_id", run_id},
           {"config_hash", config_hash},
           {"m", m},
           {"K", K},
           {"acc_0", curve.acc.front()},
           {"acc_final", curve.acc.back()},
           {"solved", counts.solved},
           {"exhausted", counts.exhausted},
           {"aborted", counts.aborted}};
    if (categories) {
        j["categories"] = json{{"FR", categories->fr},
                               {"FQ", categories->fq},
                               {"OTH", categories->oth},
                               {"frac_FR", categories->frac_fr},
                               {"frac_FQ", categories->frac_fq},
                               {"frac_OTH", categories->frac_oth}};
        j["target_accuracy"] = target_accuracy(curve, *categories, m);
    } else {
        j["note"] = "target_accuracy omitted: run categorize to produce categories.jsonl";
    }
    return j;
}

json overlap_json(const OverlapReport& report, const std::vector<std::string>& set_names) {
    json pairwise = json::array();
    for (const auto& [i, j, count] : report.pairwise) {
        pairwise.push_back(json{{"a", set_names[static_cast<std::size_t>(i)]},
                                {"b", set_names[static_cast<std::size_t>(j)]},
                                {"common_failures", count}});
    }
    return json{{"ratio", report.ratio},
                {"all_common_failures", report.intersection_all},
                {"union_failures", report.union_all},
                {"sets", set_names},
                {"pairwise", pairwise}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot open " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw StoreError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace friction
