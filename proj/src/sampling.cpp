#include "friction/sampling.hpp"

#include "friction/errors.hpp"
#include "friction/text_norm.hpp"

namespace friction {

double temperature_for(int k) {
    if (k < 0) throw ValidationError("iteration index must be >= 0");
    return 0.15 * static_cast<double>(k);
}

void StrategyState::remember(const std::string& parsed_answer) {
    forbidden.insert(normalize_answer(parsed_answer));
}

std::size_t rejection_select(const std::vector<std::string>& completions,
                             const std::set<std::string>& forbidden, const TaskSpec& spec,
                             Rng& rng) {
    if (completions.empty()) throw ValidationError("rejection_select needs completions");

    std::vector<std::size_t> survivors;
    survivors.reserve(completions.size());
    for (std::size_t i = 0; i < completions.size(); ++i) {
        std::string norm = normalize_answer(parse_answer(completions[i], spec));
        if (!forbidden.count(norm)) survivors.push_back(i);
    }

    auto pick_below = [&rng](std::size_t bound) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = rng();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    };

    if (!survivors.empty()) return survivors[pick_below(survivors.size())];
    return pick_below(completions.size());
}

}  // namespace friction
