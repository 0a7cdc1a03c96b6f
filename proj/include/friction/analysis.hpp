#ifndef FRICTION_ANALYSIS_HPP
#define FRICTION_ANALYSIS_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "friction/engine.hpp"
#include "friction/tasks.hpp"
#include "friction/types.hpp"

namespace friction {

/// Per-iteration accuracy: Acc_k counts a problem correct iff it was solved
/// at iteration <= k, so the curve is non-decreasing by construction.
/// stderr is the binomial proportion error sqrt(acc*(1-acc)/m).
struct AccuracyCurve {
    std::vector<double> acc;
    std::vector<double> stderrs;
    std::size_t m = 0;
};

AccuracyCurve accuracy_curve(const std::vector<Trajectory>& trajectories, int K);

struct CategoryDistribution {
    std::size_t fr = 0;
    std::size_t fq = 0;
    std::size_t oth = 0;
    double frac_fr = 0.0;
    double frac_fq = 0.0;
    double frac_oth = 0.0;
    std::size_t total() const { return fr + fq + oth; }
};

CategoryDistribution category_distribution(const std::vector<ErrorCategory>& labels);

/// One FR/FQ/OTH label per exhausted trajectory, parsed from a constrained
/// annotator reply. An unparseable reply is retried once, then labeled OTH
/// with rationale "annotator_unparseable".
std::vector<ErrorCategory> categorize_errors(const std::vector<Trajectory>& unsolved,
                                             const std::map<std::string, Problem>& problems,
                                             const ModelHandle& annotator, std::uint64_t seed,
                                             const RetryPolicy& retry = {});

std::vector<ChatMessage> build_categorization_prompt(const Problem& p, const Trajectory& t);

/// Fraction of problem ids labeled identically by both annotators.
double agreement(const std::vector<ErrorCategory>& labels_a,
                 const std::vector<ErrorCategory>& labels_b);

/// Geometric mean of per-token probabilities: exp(mean(logprob)).
double confidence(const std::vector<TokenLogprob>& token_logprobs);

struct BinStat {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    double initial_acc = 0.0;
    double final_acc = 0.0;
    double delta = 0.0;
    double stderr_initial = 0.0;
    double stderr_final = 0.0;
};

/// Buckets problems by a metadata key or by "confidence" (iteration-0
/// geometric-mean token probability) and reports initial/final accuracy per
/// bucket. Equal-width bins by default, equal-count when `quantile`.
std::vector<BinStat> bin_by_metric(const std::vector<Trajectory>& trajectories,
                                   const std::map<std::string, Problem>& problems,
                                   const std::string& metric, int bins, bool quantile = false);

struct OverlapReport {
    std::size_t intersection_all = 0;
    std::size_t union_all = 0;
    double ratio = 0.0;
    std::vector<std::tuple<int, int, std::size_t>> pairwise;  // (i, j, |S_i ∩ S_j|)
};

/// |intersection of all failure sets| / |union of all failure sets| plus
/// every pairwise intersection size.
OverlapReport overlap_ratio(const std::vector<std::set<std::string>>& failure_sets);

/// Accuracy an ideal feedback-incorporating solver would reach: the final
/// accuracy plus the feedback-resistance share of the unsolved problems.
/// FQ and OTH failures are not counted as recoverable.
double target_accuracy(const AccuracyCurve& curve, const CategoryDistribution& dist,
                       std::size_t m);

/// Fraction of n independent temperature-1 samples scored correct.
double familiarity_probe(const Problem& p, const ModelHandle& solver, int n,
                         const TaskSpec& spec, std::uint64_t seed,
                         const RetryPolicy& retry = {});

}  // namespace friction

#endif
