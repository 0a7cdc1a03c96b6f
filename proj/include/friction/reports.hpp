#ifndef FRICTION_REPORTS_HPP
#define FRICTION_REPORTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "friction/analysis.hpp"
#include "friction/types.hpp"

namespace friction {

/// accuracy_curve.csv: one row per iteration (iteration, accuracy, stderr).
std::string accuracy_curve_csv(const AccuracyCurve& curve);

/// bins.csv: one row per bin.
std::string bins_csv(const std::vector<BinStat>& bins);

struct RunCounts {
    std::size_t solved = 0;
    std::size_t exhausted = 0;
    std::size_t aborted = 0;
};

RunCounts count_statuses(const std::vector<Trajectory>& trajectories);

/// summary.json. Always contains run_id, config_hash, m, K, acc_0,
/// acc_final; target accuracy and category counts appear once a
/// categorization exists, with a note explaining their absence otherwise.
json summary_json(const std::string& run_id, const std::string& config_hash, std::size_t m,
                  int K, const AccuracyCurve& curve, const RunCounts& counts,
                  const std::optional<CategoryDistribution>& categories);

json overlap_json(const OverlapReport& report, const std::vector<std::string>& set_names);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace friction

#endif
