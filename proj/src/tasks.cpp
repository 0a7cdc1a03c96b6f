#include "friction/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "friction/errors.hpp"
#include "friction/model_gateway.hpp"
#include "friction/text_norm.hpp"

namespace friction {

namespace {

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

// --- boxed expressions -----------------------------------------------------

struct Span {
    std::size_t begin = std::string::npos;
    std::size_t content_begin = 0;
    std::size_t content_end = 0;  // exclusive
    bool found() const { return begin != std::string::npos; }
};

// Last \boxed{...} with balanced braces.
Span last_boxed(const std::string& text) {
    const std::string marker = "\\boxed{";
    Span best;
    std::size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string::npos) {
        std::size_t content = pos + marker.size();
        int depth = 1;
        std::size_t i = content;
        for (; i < text.size() && depth > 0; ++i) {
            if (text[i] == '{') ++depth;
            else if (text[i] == '}') --depth;
        }
        if (depth == 0) {
            best.begin = pos;
            best.content_begin = content;
            best.content_end = i - 1;
        }
        pos = content;
    }
    return best;
}

bool is_choice_letter(char c) { return c >= 'A' && c <= 'J'; }

// Last standalone A-J letter (word-boundary on both sides).
std::string last_standalone_choice(const std::string& text, std::size_t begin, std::size_t end) {
    std::string found;
    for (std::size_t i = begin; i < end; ++i) {
        if (!is_choice_letter(text[i])) continue;
        bool left_ok = i == begin || !is_word_char(text[i - 1]);
        bool right_ok = i + 1 >= end || !is_word_char(text[i + 1]);
        if (left_ok && right_ok) found = std::string(1, text[i]);
    }
    return found;
}

// Last standalone numeral token (digit run, hex alphabet in base 16, comma
// grouping in base 10).
Span last_standalone_number(const std::string& text, int base) {
    Span best;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t len = numeral_token_len(text, i, base);
        if (len == 0) {
            ++i;
            continue;
        }
        std::size_t end = i + len;
        bool left_ok = i == 0 || !is_word_char(text[i - 1]);
        bool right_ok = end >= text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) {
            best.begin = i;
            best.content_begin = i;
            best.content_end = end;
        }
        i = end;
    }
    return best;
}

std::string parse_multiple_choice(const std::string& raw) {
    Span boxed = last_boxed(raw);
    if (boxed.found()) {
        std::string inner = last_standalone_choice(raw, boxed.content_begin, boxed.content_end);
        if (!inner.empty()) return inner;
    }
    return last_standalone_choice(raw, 0, raw.size());
}

std::string parse_numeric_boxed(const std::string& raw, int base) {
    Span boxed = last_boxed(raw);
    if (boxed.found())
        return trim(raw.substr(boxed.content_begin, boxed.content_end - boxed.content_begin));
    Span num = last_standalone_number(raw, base);
    if (num.found()) return raw.substr(num.content_begin, num.content_end - num.content_begin);
    return "";
}

std::string parse_answer_line(const std::string& raw) {
    // last case-insensitive "answer:" marker, text to end of that line
    std::string lower = lower_ascii(raw);
    std::size_t pos = lower.rfind("answer:");
    if (pos != std::string::npos) {
        std::size_t start = pos + 7;
        std::size_t end = raw.find('\n', start);
        std::string line =
            trim(raw.substr(start, end == std::string::npos ? std::string::npos : end - start));
        if (!line.empty()) return line;
    }
    // else: last non-empty line
    std::size_t end = raw.size();
    while (end > 0) {
        std::size_t begin = raw.rfind('\n', end - 1);
        std::size_t line_begin = begin == std::string::npos ? 0 : begin + 1;
        std::string line = trim(raw.substr(line_begin, end - line_begin));
        if (!line.empty()) return line;
        if (begin == std::string::npos) break;
        end = begin;
    }
    return "";
}

bool alias_match(const std::string& parsed, const Problem& p) {
    std::string norm = normalize_answer(parsed);
    if (norm.empty()) return false;
    for (const auto& alias : p.aliases)
        if (normalize_answer(alias) == norm) return true;
    return false;
}

const char kJudgeSystem[] =
    "You grade answers to questions. Reply with exactly YES or NO.";

std::string judge_user_prompt(const std::string& question, const std::string& gold,
                              const std::string& candidate) {
    return "Question: " + question + "\nGold answer: " + gold + "\nCandidate answer: " +
           candidate +
           "\nDoes the candidate answer mean the same thing as the gold answer? Reply with "
           "exactly YES or NO.";
}

std::optional<bool> parse_verdict(const std::string& reply) {
    std::string upper = upper_ascii(reply);
    std::size_t yes = upper.rfind("YES");
    std::size_t no = upper.rfind("NO");
    auto standalone = [&](std::size_t pos, std::size_t len) {
        if (pos == std::string::npos) return false;
        bool left = pos == 0 || !is_word_char(upper[pos - 1]);
        bool right = pos + len >= upper.size() || !is_word_char(upper[pos + len]);
        return left && right;
    };
    bool has_yes = standalone(yes, 3);
    bool has_no = standalone(no, 2);
    if (has_yes == has_no) return std::nullopt;
    return has_yes;
}

}  // namespace

TaskSpec task_spec_for(const std::string& task_name) {
    std::string t = lower_ascii(task_name);
    TaskSpec spec;
    if (t == "aime" || starts_with(t, "math")) {
        spec.format = TaskFormat::numeric_boxed;
        spec.parser = "boxed_number";
        spec.fewshot_k = 0;
    } else if (starts_with(t, "hexmult")) {
        spec.format = TaskFormat::numeric_boxed;
        spec.parser = "boxed_number";
        spec.numeric_base = 16;
        spec.fewshot_k = 0;
    } else if (starts_with(t, "mult")) {
        spec.format = TaskFormat::numeric_boxed;
        spec.parser = "boxed_number";
        spec.fewshot_k = 0;
    } else if (t == "mmlu" || t == "mmlu_pro" || t == "mmlupro") {
        spec.format = TaskFormat::multiple_choice;
        spec.parser = "choice";
        spec.categorized = true;
    } else if (t == "gpqa") {
        spec.format = TaskFormat::multiple_choice;
        spec.parser = "choice";
    } else if (t == "popqa") {
        spec.format = TaskFormat::open_ended;
        spec.parser = "answer_line";
        spec.judge_scored = true;
    } else if (t == "triviaqa") {
        spec.format = TaskFormat::open_ended;
        spec.parser = "answer_line";
    } else {
        spec.format = TaskFormat::open_ended;
        spec.parser = "answer_line";
    }
    return spec;
}

std::vector<Problem> parse_dataset(const std::string& bytes, const std::string& task) {
    std::vector<Problem> out;
    std::set<std::string> ids;
    std::istringstream in(bytes);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        Problem p;
        try {
            p = json::parse(line).get<Problem>();
            p = validate_problem(std::move(p));
        } catch (const json::exception& e) {
            throw DatasetError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        } catch (const ValidationError& e) {
            throw DatasetError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        if (!task.empty() && p.task.empty()) p.task = task;
        if (!ids.insert(p.id).second)
            throw DatasetError("line " + std::to_string(lineno) + ": duplicate id " + p.id,
                               lineno);
        out.push_back(std::move(p));
    }
    if (out.empty()) throw DatasetError("dataset empty");
    return out;
}

std::vector<Problem> load_dataset(const std::string& path, const std::string& task) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), task);
}

std::vector<Problem> subsample(const std::vector<Problem>& dataset, double fraction,
                               std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ValidationError("subsample fraction must be in (0,1]");
    std::size_t m = dataset.size();
    auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m)));
    if (want >= m) return dataset;

    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    Rng rng(splitmix64(seed ^ 0x5ab5a3b1e0ULL));
    for (std::size_t i = m - 1; i > 0; --i) {
        std::size_t j = uniform_below(rng, i + 1);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
    std::vector<Problem> out;
    out.reserve(want);
    for (std::size_t i : idx) out.push_back(dataset[i]);
    return out;
}

std::vector<Problem> assemble_fewshot(const std::vector<Problem>& dataset, const Problem& p,
                                      int k, const TaskSpec& spec, std::uint64_t seed) {
    if (k <= 0) return {};
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Problem& q = dataset[i];
        if (q.id == p.id) continue;
        if (spec.categorized && p.category && q.category != p.category) continue;
        pool.push_back(i);
    }
    if (pool.size() < static_cast<std::size_t>(k))
        throw DatasetError("insufficient exemplars for " + p.id + ": need " + std::to_string(k) +
                           ", have " + std::to_string(pool.size()));
    Rng rng(seed);
    std::vector<Problem> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        std::size_t j = uniform_below(rng, pool.size());
        out.push_back(dataset[pool[j]]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return out;
}

std::string parse_answer(const std::string& raw_output, const TaskSpec& spec) {
    if (raw_output.empty()) return "";
    if (spec.parser == "choice") return parse_multiple_choice(raw_output);
    if (spec.parser == "boxed_number") return parse_numeric_boxed(raw_output, spec.numeric_base);
    return parse_answer_line(raw_output);
}

bool score(const std::string& parsed, const Problem& p, const TaskSpec& spec) {
    if (parsed.empty()) return false;
    switch (spec.format) {
        case TaskFormat::multiple_choice:
            return trim(parsed) == p.answer;
        case TaskFormat::numeric_boxed:
            if (numbers_equal(parsed, p.answer, spec.numeric_base)) return true;
            return alias_match(parsed, p);
        case TaskFormat::open_ended:
            return alias_match(parsed, p);
    }
    return false;
}

bool judge_score(const std::string& parsed, const Problem& p, const ModelHandle& judge,
                 Rng& rng) {
    if (parsed.empty()) return false;
    if (alias_match(parsed, p)) return true;  // never call the judge on verbatim matches

    ChatExchange req;
    req.messages = {{"system", kJudgeSystem},
                    {"user", judge_user_prompt(p.question, p.answer, parsed)}};
    req.temperature = 0.0;
    req.n = 1;
    ChatExchange res = complete(judge, std::move(req), rng);
    if (res.completions.empty()) return false;
    auto verdict = parse_verdict(res.completions.front().text);
    if (!verdict) return alias_match(parsed, p);
    return *verdict;
}

bool evaluate_answer(const std::string& parsed, const Problem& p, const TaskSpec& spec,
                     Rng& judge_rng) {
    if (spec.judge_scored && spec.judge) {
        if (score(parsed, p, spec)) return true;
        return judge_score(parsed, p, *spec.judge, judge_rng);
    }
    return score(parsed, p, spec);
}

std::string format_question(const Problem& p) {
    std::string out = "Question: " + p.question;
    for (const auto& c : p.choices) out += "\n" + c.label + ". " + c.text;
    return out;
}

}  // namespace friction
