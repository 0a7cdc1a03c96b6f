#ifndef FRICTION_SAMPLING_HPP
#define FRICTION_SAMPLING_HPP

#include <set>
#include <string>
#include <vector>

#include "friction/rng.hpp"
#include "friction/tasks.hpp"

namespace friction {

/// Progressive schedule: 0.0 for iteration 0, 0.15 for iteration 1, 0.3 for
/// iteration 2, and so on (0.15 * k). Any per-model floor is applied by the
/// engine on top of this.
double temperature_for(int k);

/// Per-problem view of the answers already tried, compared after
/// normalization.
struct StrategyState {
    SamplingStrategy strategy = SamplingStrategy::greedy;
    std::set<std::string> forbidden;  // normalized parsed answers of all prior records
    int candidates_n = 25;

    void remember(const std::string& parsed_answer);
};

/// Picks one of the candidate completions: parse each, drop those whose
/// parsed answer was already tried, choose uniformly among the survivors;
/// when every candidate repeats an old answer, choose uniformly among all
/// of them. Returns the chosen index.
std::size_t rejection_select(const std::vector<std::string>& completions,
                             const std::set<std::string>& forbidden, const TaskSpec& spec,
                             Rng& rng);

}  // namespace friction

#endif
