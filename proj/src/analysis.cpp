#include "friction/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "friction/errors.hpp"
#include "friction/model_gateway.hpp"
#include "friction/text_norm.hpp"

namespace friction {

namespace {

double binomial_stderr(double acc, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(acc * (1.0 - acc) / static_cast<double>(n));
}

bool solved_by(const Trajectory& t, int k) {
    return t.solved_at.has_value() && *t.solved_at <= k;
}

std::optional<CategoryLabel> parse_category_label(const std::string& reply) {
    // last standalone FR / FQ / OTH wins
    std::optional<CategoryLabel> found;
    auto scan_for = [&](const char* token, CategoryLabel label) {
        std::size_t len = std::string(token).size();
        std::size_t pos = 0;
        std::size_t last = std::string::npos;
        while ((pos = reply.find(token, pos)) != std::string::npos) {
            bool left = pos == 0 || !is_word_char(reply[pos - 1]);
            bool right = pos + len >= reply.size() || !is_word_char(reply[pos + len]);
            if (left && right) last = pos;
            pos += len;
        }
        return last;
    };
    std::size_t best_pos = std::string::npos;
    for (auto [token, label] : {std::pair{"FR", CategoryLabel::FR},
                                std::pair{"FQ", CategoryLabel::FQ},
                                std::pair{"OTH", CategoryLabel::OTH}}) {
        std::size_t pos = scan_for(token, label);
        if (pos != std::string::npos && (best_pos == std::string::npos || pos > best_pos)) {
            best_pos = pos;
            found = label;
        }
    }
    return found;
}

}  // namespace

AccuracyCurve accuracy_curve(const std::vector<Trajectory>& trajectories, int K) {
    if (trajectories.empty()) throw AnalysisError("empty run");
    if (K < 1) throw AnalysisError("K must be >= 1");
    AccuracyCurve curve;
    curve.m = trajectories.size();
    curve.acc.resize(static_cast<std::size_t>(K));
    curve.stderrs.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        std::size_t solved = 0;
        for (const auto& t : trajectories)
            if (solved_by(t, k)) ++solved;
        double acc = static_cast<double>(solved) / static_cast<double>(curve.m);
        curve.acc[static_cast<std::size_t>(k)] = acc;
        curve.stderrs[static_cast<std::size_t>(k)] = binomial_stderr(acc, curve.m);
    }
    return curve;
}

CategoryDistribution category_distribution(const std::vector<ErrorCategory>& labels) {
    CategoryDistribution d;
    for (const auto& l : labels) {
        switch (l.label) {
            case CategoryLabel::FR: ++d.fr; break;
            case CategoryLabel::FQ: ++d.fq; break;
            case CategoryLabel::OTH: ++d.oth; break;
        }
    }
    std::size_t total = d.total();
    if (total > 0) {
        d.frac_fr = static_cast<double>(d.fr) / static_cast<double>(total);
        d.frac_fq = static_cast<double>(d.fq) / static_cast<double>(total);
        d.frac_oth = static_cast<double>(d.oth) / static_cast<double>(total);
    }
    return d;
}

std::vector<ChatMessage> build_categorization_prompt(const Problem& p, const Trajectory& t) {
    std::string user =
        "A solver attempted the following problem repeatedly, received feedback after each "
        "failed attempt, and never produced the correct answer.\n\n";
    user += format_question(p);
    user += "\nCorrect answer: " + p.answer + "\n";
    for (const auto& r : t.records) {
        user += "\nIteration " + std::to_string(r.iteration) + ": " + r.raw_output + "\n";
        if (r.feedback) user += "Feedback: " + *r.feedback + "\n";
    }
    user +=
        "\nClassify the primary reason the problem remained unsolved:\n"
        "FR - feedback resistance: the feedback was accurate and relevant, but the solver "
        "failed to incorporate it.\n"
        "FQ - feedback quality: the feedback was incorrect, ambiguous, or missed the key "
        "error.\n"
        "OTH - other: the problem is ambiguous, or the solution is right but fails on format "
        "or style.\n"
        "Reply with exactly one label: FR, FQ, or OTH.";
    return {{"system", "You classify failed problem-solving trajectories into error categories."},
            {"user", user}};
}

std::vector<ErrorCategory> categorize_errors(const std::vector<Trajectory>& unsolved,
                                             const std::map<std::string, Problem>& problems,
                                             const ModelHandle& annotator, std::uint64_t seed,
                                             const RetryPolicy& retry) {
    std::vector<ErrorCategory> out;
    out.reserve(unsolved.size());
    for (const auto& t : unsolved) {
        if (t.status != TrajectoryStatus::exhausted)
            throw ValidationError("categorize_errors expects exhausted trajectories (" +
                                  t.problem_id + ")");
        auto pit = problems.find(t.problem_id);
        if (pit == problems.end())
            throw AnalysisError("no problem for trajectory " + t.problem_id);

        Rng rng = derive_rng(seed, t.problem_id, "annotate");
        ChatExchange req;
        req.messages = build_categorization_prompt(pit->second, t);
        req.temperature = 0.0;
        req.n = 1;

        ErrorCategory cat;
        cat.problem_id = t.problem_id;
        cat.annotator = annotator.name;
        std::optional<CategoryLabel> label;
        std::string reply;
        for (int attempt = 0; attempt < 2 && !label; ++attempt) {
            ChatExchange res = call_model_with_retry(annotator, req, rng, retry);
            reply = res.completions.empty() ? "" : res.completions.front().text;
            label = parse_category_label(reply);
        }
        if (label) {
            cat.label = *label;
            cat.rationale = trim(reply).substr(0, 2000);
        } else {
            cat.label = CategoryLabel::OTH;
            cat.rationale = "annotator_unparseable";
        }
        out.push_back(std::move(cat));
    }
    return out;
}

double agreement(const std::vector<ErrorCategory>& labels_a,
                 const std::vector<ErrorCategory>& labels_b) {
    std::map<std::string, CategoryLabel> a;
    for (const auto& l : labels_a)
        if (!a.emplace(l.problem_id, l.label).second)
            throw AnalysisError("duplicate label for " + l.problem_id);
    std::map<std::string, CategoryLabel> b;
    for (const auto& l : labels_b)
        if (!b.emplace(l.problem_id, l.label).second)
            throw AnalysisError("duplicate label for " + l.problem_id);
    if (a.size() != b.size()) throw AnalysisError("annotators labeled different problem sets");
    if (a.empty()) throw AnalysisError("no labels to compare");
    std::size_t equal = 0;
    for (const auto& [id, label] : a) {
        auto it = b.find(id);
        if (it == b.end()) throw AnalysisError("annotators labeled different problem sets");
        if (it->second == label) ++equal;
    }
    return static_cast<double>(equal) / static_cast<double>(a.size());
}

double confidence(const std::vector<TokenLogprob>& token_logprobs) {
    if (token_logprobs.empty()) throw AnalysisError("empty token list");
    double sum = 0.0;
    for (const auto& t : token_logprobs) sum += t.logprob;
    return std::exp(sum / static_cast<double>(token_logprobs.size()));
}

std::vector<BinStat> bin_by_metric(const std::vector<Trajectory>& trajectories,
                                   const std::map<std::string, Problem>& problems,
                                   const std::string& metric, int bins, bool quantile) {
    if (trajectories.empty()) throw AnalysisError("empty run");
    if (bins < 1) throw AnalysisError("bins must be >= 1");

    struct Item {
        double value;
        bool initial;
        bool final_;
    };
    std::vector<Item> items;
    items.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        double value = 0.0;
        if (metric == "confidence") {
            if (t.records.empty() || !t.records.front().token_logprobs)
                throw AnalysisError("missing metric 'confidence' for " + t.problem_id);
            value = confidence(*t.records.front().token_logprobs);
        } else {
            auto pit = problems.find(t.problem_id);
            if (pit == problems.end())
                throw AnalysisError("missing metric '" + metric + "' for " + t.problem_id);
            auto mit = pit->second.metadata.find(metric);
            if (mit == pit->second.metadata.end())
                throw AnalysisError("missing metric '" + metric + "' for " + t.problem_id);
            value = mit->second;
        }
        items.push_back({value, !t.records.empty() && t.records.front().correct,
                         t.status == TrajectoryStatus::solved});
    }

    std::vector<std::vector<const Item*>> buckets(static_cast<std::size_t>(bins));
    if (quantile) {
        std::vector<const Item*> sorted;
        sorted.reserve(items.size());
        for (const auto& it : items) sorted.push_back(&it);
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const Item* a, const Item* b) { return a->value < b->value; });
        for (std::size_t i = 0; i < sorted.size(); ++i)
            buckets[i * static_cast<std::size_t>(bins) / sorted.size()].push_back(sorted[i]);
    } else {
        double lo = items.front().value;
        double hi = items.front().value;
        for (const auto& it : items) {
            lo = std::min(lo, it.value);
            hi = std::max(hi, it.value);
        }
        double width = (hi - lo) / static_cast<double>(bins);
        for (const auto& it : items) {
            std::size_t idx = 0;
            if (width > 0.0)
                idx = std::min(static_cast<std::size_t>((it.value - lo) / width),
                               static_cast<std::size_t>(bins - 1));
            buckets[idx].push_back(&it);
        }
    }

    std::vector<BinStat> out(static_cast<std::size_t>(bins));
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        BinStat& s = out[i];
        s.n = buckets[i].size();
        if (s.n == 0) continue;
        double lo = buckets[i].front()->value;
        double hi = lo;
        std::size_t init = 0;
        std::size_t fin = 0;
        for (const Item* it : buckets[i]) {
            lo = std::min(lo, it->value);
            hi = std::max(hi, it->value);
            if (it->initial) ++init;
            if (it->final_) ++fin;
        }
        s.lo = lo;
        s.hi = hi;
        s.initial_acc = static_cast<double>(init) / static_cast<double>(s.n);
        s.final_acc = static_cast<double>(fin) / static_cast<double>(s.n);
        s.delta = s.final_acc - s.initial_acc;
        s.stderr_initial = binomial_stderr(s.initial_acc, s.n);
        s.stderr_final = binomial_stderr(s.final_acc, s.n);
    }
    return out;
}

OverlapReport overlap_ratio(const std::vector<std::set<std::string>>& failure_sets) {
    if (failure_sets.size() < 2) throw AnalysisError("overlap needs at least two failure sets");
    OverlapReport report;

    std::set<std::string> union_all;
    for (const auto& s : failure_sets) union_all.insert(s.begin(), s.end());
    if (union_all.empty()) throw AnalysisError("all failure sets are empty");

    std::set<std::string> inter = failure_sets.front();
    for (std::size_t i = 1; i < failure_sets.size(); ++i) {
        std::set<std::string> next;
        std::set_intersection(inter.begin(), inter.end(), failure_sets[i].begin(),
                              failure_sets[i].end(), std::inserter(next, next.begin()));
        inter = std::move(next);
    }

    for (std::size_t i = 0; i < failure_sets.size(); ++i) {
        for (std::size_t j = i + 1; j < failure_sets.size(); ++j) {
            std::set<std::string> pair;
            std::set_intersection(failure_sets[i].begin(), failure_sets[i].end(),
                                  failure_sets[j].begin(), failure_sets[j].end(),
                                  std::inserter(pair, pair.begin()));
            report.pairwise.emplace_back(static_cast<int>(i), static_cast<int>(j), pair.size());
        }
    }

    report.intersection_all = inter.size();
    report.union_all = union_all.size();
    report.ratio =
        static_cast<double>(report.intersection_all) / static_cast<double>(report.union_all);
    return report;
}

double target_accuracy(const AccuracyCurve& curve, const CategoryDistribution& dist,
                       std::size_t m) {
    if (curve.acc.empty() || m == 0) throw AnalysisError("target_accuracy needs a curve and m");
    double acc_final = curve.acc.back();
    double unsolved = static_cast<double>(dist.total());
    return acc_final + unsolved * dist.frac_fr / static_cast<double>(m);
}

double familiarity_probe(const Problem& p, const ModelHandle& solver, int n,
                         const TaskSpec& spec, std::uint64_t seed, const RetryPolicy& retry) {
    if (n < 1) throw AnalysisError("familiarity_probe needs n >= 1");
    Rng rng = derive_rng(seed, p.id, "probe");
    ChatExchange req;
    req.messages = build_prompt(p, {}, {});
    req.temperature = 1.0;
    req.n = n;
    ChatExchange res = call_model_with_retry(solver, req, rng, retry);
    std::size_t correct = 0;
    for (const auto& c : res.completions)
        if (score(parse_answer(c.text, spec), p, spec)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(res.completions.size());
}

}  // namespace friction
