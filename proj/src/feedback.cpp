#include "friction/feedback.hpp"

#include <algorithm>
#include <cctype>

#include "friction/errors.hpp"
#include "friction/model_gateway.hpp"
#include "friction/synthetic_arith.hpp"
#include "friction/tasks.hpp"
#include "friction/text_norm.hpp"

namespace friction {

const char kF1Feedback[] = "Your answer was incorrect. Please answer the question again.";

const char kFeedbackInstruction[] =
    "Please give me feedback on which solution step is wrong and how to get to the correct "
    "answer without revealing the answer.";

namespace {

constexpr char kMasked[] = "[masked]";
constexpr std::size_t kMaskedLen = sizeof(kMasked) - 1;

bool word_boundary_left(const std::string& text, std::size_t pos) {
    return pos == 0 || !is_word_char(text[pos - 1]);
}

bool word_boundary_right(const std::string& text, std::size_t end) {
    return end >= text.size() || !is_word_char(text[end]);
}

/// An alias prepared for scanning. Single-letter aliases match
/// case-sensitively (an answer "A" must not blank the article "a"); longer
/// ones casefold, with whitespace runs matching whitespace runs.
struct AliasMatcher {
    std::string core;
    bool case_sensitive = false;
};

bool chars_equal(char a, char b, bool case_sensitive) {
    if (case_sensitive) return a == b;
    return std::tolower(static_cast<unsigned char>(a)) ==
           std::tolower(static_cast<unsigned char>(b));
}

// Returns match length at text[pos], or 0.
std::size_t match_alias_at(const std::string& text, std::size_t pos, const AliasMatcher& m) {
    std::size_t ti = pos;
    std::size_t ai = 0;
    while (ai < m.core.size()) {
        char ac = m.core[ai];
        if (std::isspace(static_cast<unsigned char>(ac))) {
            // a whitespace run in the alias matches any whitespace run
            if (ti >= text.size() || !std::isspace(static_cast<unsigned char>(text[ti])))
                return 0;
            while (ti < text.size() && std::isspace(static_cast<unsigned char>(text[ti]))) ++ti;
            while (ai < m.core.size() && std::isspace(static_cast<unsigned char>(m.core[ai])))
                ++ai;
            continue;
        }
        if (ti >= text.size() || !chars_equal(text[ti], ac, m.case_sensitive)) return 0;
        ++ti;
        ++ai;
    }
    return ti - pos;
}

/// Everything mask_feedback needs to know about one problem, computed once.
struct MaskingPlan {
    std::vector<AliasMatcher> aliases;       // longest core first
    std::vector<std::string> decorations;    // multiple-choice decorated variants
    std::string choice_label;                // empty unless multiple-choice
    bool numeric = false;
    int base = 10;
    std::set<std::string> masked_values;     // canonical numerals to hide
};

MaskingPlan build_plan(const Problem& p) {
    MaskingPlan plan;
    TaskSpec spec = task_spec_for(p.task);
    bool multiple_choice = !p.choices.empty() || spec.format == TaskFormat::multiple_choice;

    for (const auto& alias : p.aliases) {
        AliasMatcher m;
        m.core = strip_outer_punct(trim(alias));
        if (m.core.empty()) continue;
        m.case_sensitive =
            m.core.size() == 1 && std::isalpha(static_cast<unsigned char>(m.core[0]));
        plan.aliases.push_back(std::move(m));
    }
    std::sort(plan.aliases.begin(), plan.aliases.end(),
              [](const AliasMatcher& a, const AliasMatcher& b) {
                  return a.core.size() > b.core.size();
              });

    if (multiple_choice) {
        const std::string& label = p.answer;
        plan.choice_label = label;
        plan.decorations = {
            "\\boxed{(" + label + ")}",
            "\\boxed{" + label + "}",
            "**" + label + "**",
            "*" + label + "*",
            "(" + label + ")",
        };
    }

    plan.base = spec.numeric_base;
    auto canonical_answer = canonical_number(p.answer, plan.base);
    plan.numeric = spec.format == TaskFormat::numeric_boxed || canonical_answer.has_value();
    if (canonical_answer) plan.masked_values.insert(*canonical_answer);

    // decimal multiplication also hides the template's partial products
    if (plan.numeric && p.task.rfind("mult", 0) == 0) {
        if (auto q = parse_mult_question(p.question)) {
            if (q->base == 10) {
                MultInstance inst = make_mult_instance(q->a, q->b, q->base);
                for (const auto& pp : inst.partial_products) {
                    if (auto v = canonical_number(pp.unshifted, 10)) plan.masked_values.insert(*v);
                    if (auto v = canonical_number(pp.shifted, 10)) plan.masked_values.insert(*v);
                }
            }
        }
    }
    return plan;
}

// Decorated variant at pos ("(A)", "**A**", "\boxed{A}", "\boxed{ A }").
std::size_t match_decoration_at(const std::string& text, std::size_t pos,
                                const MaskingPlan& plan) {
    for (const auto& d : plan.decorations) {
        if (text.compare(pos, d.size(), d) == 0) return d.size();
    }
    // \boxed{ A } with inner padding
    const std::string boxed = "\\boxed{";
    if (!plan.choice_label.empty() && text.compare(pos, boxed.size(), boxed) == 0) {
        std::size_t i = pos + boxed.size();
        while (i < text.size() && text[i] == ' ') ++i;
        if (text.compare(i, plan.choice_label.size(), plan.choice_label) == 0) {
            i += plan.choice_label.size();
            while (i < text.size() && text[i] == ' ') ++i;
            if (i < text.size() && text[i] == '}') return i + 1 - pos;
        }
    }
    return 0;
}

// Boxed numeral at pos whose value is hidden: consumes the whole \boxed{...}.
std::size_t match_boxed_value_at(const std::string& text, std::size_t pos,
                                 const MaskingPlan& plan) {
    const std::string boxed = "\\boxed{";
    if (text.compare(pos, boxed.size(), boxed) != 0) return 0;
    std::size_t i = pos + boxed.size();
    std::size_t close = text.find('}', i);
    if (close == std::string::npos) return 0;
    auto v = canonical_number(text.substr(i, close - i), plan.base);
    if (v && plan.masked_values.count(*v)) return close + 1 - pos;
    return 0;
}

template <typename OnMatch, typename OnChar>
void scan(const std::string& text, const MaskingPlan& plan, OnMatch&& on_match,
          OnChar&& on_char) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        // already-masked spans are atomic; never match inside them
        if (text.compare(pos, kMaskedLen, kMasked) == 0) {
            on_char(text.data() + pos, kMaskedLen);
            pos += kMaskedLen;
            continue;
        }

        if (std::size_t len = match_decoration_at(text, pos, plan)) {
            on_match(pos, len);
            pos += len;
            continue;
        }
        if (plan.numeric) {
            if (std::size_t len = match_boxed_value_at(text, pos, plan)) {
                on_match(pos, len);
                pos += len;
                continue;
            }
        }

        bool left = word_boundary_left(text, pos);
        if (left) {
            std::size_t matched = 0;
            for (const auto& alias : plan.aliases) {
                std::size_t len = match_alias_at(text, pos, alias);
                if (len && word_boundary_right(text, pos + len)) {
                    matched = len;
                    break;
                }
            }
            if (matched) {
                on_match(pos, matched);
                pos += matched;
                continue;
            }
            if (plan.numeric) {
                std::size_t len = numeral_token_len(text, pos, plan.base);
                if (len && word_boundary_right(text, pos + len)) {
                    auto v = canonical_number(text.substr(pos, len), plan.base);
                    if (v && plan.masked_values.count(*v)) {
                        on_match(pos, len);
                        pos += len;
                        continue;
                    }
                    // a clean numeral that isn't hidden: skip it whole so its
                    // inner digits are not rescanned
                    on_char(text.data() + pos, len);
                    pos += len;
                    continue;
                }
            }
        }
        on_char(text.data() + pos, 1);
        ++pos;
    }
}

}  // namespace

std::string mask_feedback(const std::string& text, const Problem& p) {
    MaskingPlan plan = build_plan(p);
    std::string out;
    out.reserve(text.size());
    scan(
        text, plan, [&](std::size_t, std::size_t) { out += kMasked; },
        [&](const char* s, std::size_t n) { out.append(s, n); });
    return out;
}

std::optional<std::string> find_leak(const std::string& text, const Problem& p) {
    MaskingPlan plan = build_plan(p);
    std::optional<std::string> leak;
    scan(
        text, plan,
        [&](std::size_t pos, std::size_t len) {
            if (!leak) leak = text.substr(pos, len);
        },
        [](const char*, std::size_t) {});
    return leak;
}

std::string mask_and_check(const std::string& text, const Problem& p) {
    std::string masked = mask_feedback(text, p);
    if (auto leak = find_leak(masked, p))
        throw FeedbackLeak("feedback leaked '" + *leak + "' for problem " + p.id);
    return masked;
}

std::string feedback_f1(const FeedbackRequest& req) {
    if (req.mechanism != FeedbackMechanism::F1)
        throw ValidationError("feedback_f1 called with mechanism != F1");
    if (req.trajectory_prefix.empty() || req.trajectory_prefix.back().correct)
        throw ValidationError("feedback requested for a correct attempt");
    return kF1Feedback;
}

std::vector<ChatMessage> build_feedback_prompt(const Problem& p,
                                               const std::vector<IterationRecord>& prefix) {
    std::string user = format_question(p);
    user += "\n";
    for (const auto& r : prefix) {
        user += "\nAttempt " + std::to_string(r.iteration) + ": " + r.raw_output + "\n";
        if (r.feedback) user += "Feedback: " + *r.feedback + "\n";
    }
    user += "\nCorrect answer: " + p.answer + "\n";
    if (p.solution_steps) user += "Reference solution:\n" + *p.solution_steps + "\n";
    user += "\n";
    user += kFeedbackInstruction;
    return {
        {"system",
         "You are reviewing a student's attempts at a problem. You know the correct answer and, "
         "when given, the reference solution. Identify what went wrong and how to fix it, but "
         "never state the final answer itself."},
        {"user", user},
    };
}

std::string feedback_f2_f3(const FeedbackRequest& req, Rng& rng) {
    if (req.mechanism == FeedbackMechanism::F1)
        throw ValidationError("feedback_f2_f3 called with mechanism F1");
    if (req.trajectory_prefix.empty() || req.trajectory_prefix.back().correct)
        throw ValidationError("feedback requested for a correct attempt");
    if (req.generator == nullptr) throw ValidationError("feedback generator missing");

    ChatExchange chat;
    chat.messages = build_feedback_prompt(req.problem, req.trajectory_prefix);
    chat.temperature = 0.0;  // reproducible feedback
    chat.n = 1;
    ChatExchange res = complete(*req.generator, std::move(chat), rng);
    std::string raw = res.completions.empty() ? "" : res.completions.front().text;
    std::string masked = mask_feedback(raw, req.problem);
    if (trim(masked).empty()) return kF1Feedback;
    return masked;
}

}  // namespace friction
