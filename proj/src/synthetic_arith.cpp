#include "friction/synthetic_arith.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "friction/errors.hpp"
#include "friction/rng.hpp"

namespace friction {

namespace {

// little-endian digit vectors, one int per digit in [0, base)

const char* kDigitChars = "0123456789ABCDEF";

int digit_of(char c, int base) {
    if (c >= '0' && c <= '9') return c - '0';
    if (base == 16) {
        if (c >= 'A' && c <= 'F') return 10 + (c - 'A');
        if (c >= 'a' && c <= 'f') return 10 + (c - 'a');
    }
    return -1;
}

std::vector<int> digits_from(const std::string& s, int base) {
    if (s.empty()) throw ValidationError("empty numeral");
    std::vector<int> d(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        int v = digit_of(s[s.size() - 1 - i], base);
        if (v < 0) throw ValidationError("invalid digit in numeral '" + s + "'");
        d[i] = v;
    }
    while (d.size() > 1 && d.back() == 0) d.pop_back();
    return d;
}

std::string digits_to(const std::vector<int>& d, int base) {
    std::size_t n = d.size();
    while (n > 1 && d[n - 1] == 0) --n;
    std::string s(n, '0');
    for (std::size_t i = 0; i < n; ++i) s[n - 1 - i] = kDigitChars[d[i]];
    (void)base;
    return s;
}

std::vector<int> mul_digit(const std::vector<int>& a, int m, int base) {
    std::vector<int> out(a.size() + 2, 0);
    int carry = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        int v = a[i] * m + carry;
        out[i] = v % base;
        carry = v / base;
    }
    std::size_t i = a.size();
    while (carry) {
        out[i++] = carry % base;
        carry /= base;
    }
    out.resize(std::max<std::size_t>(i, 1));
    return out;
}

std::vector<int> shift_up(std::vector<int> a, int places) {
    if (a.size() == 1 && a[0] == 0) return a;  // 0 shifted is 0
    a.insert(a.begin(), static_cast<std::size_t>(places), 0);
    return a;
}

std::vector<int> add(const std::vector<int>& a, const std::vector<int>& b, int base) {
    std::vector<int> out(std::max(a.size(), b.size()) + 1, 0);
    int carry = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        int v = carry;
        if (i < a.size()) v += a[i];
        if (i < b.size()) v += b[i];
        out[i] = v % base;
        carry = v / base;
    }
    return out;
}

void check_base(int base) {
    if (base != 10 && base != 16) throw ValidationError("base must be 10 or 16");
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    // unbiased rejection sampling, stable across standard libraries
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

std::string random_operand(Rng& rng, int digits, int base, bool decimal_digits_only) {
    int hi = decimal_digits_only ? 9 : base - 1;
    std::string s;
    s.reserve(static_cast<std::size_t>(digits));
    s.push_back(kDigitChars[1 + uniform_below(rng, static_cast<std::uint64_t>(hi))]);
    for (int i = 1; i < digits; ++i)
        s.push_back(kDigitChars[uniform_below(rng, static_cast<std::uint64_t>(hi + 1))]);
    return s;
}

constexpr char kTimes[] = "\xC3\x97";  // multiplication sign
constexpr char kMasked[] = "[masked]";

bool is_value_token(const std::string& tok, int base) {
    if (tok == kMasked) return true;
    if (tok.empty()) return false;
    for (char c : tok)
        if (digit_of(c, base) < 0) return false;
    return true;
}

// Replaces the trailing "<lhs> = <value>" value of a line when it is a
// numeral (or an earlier [masked]); no-op otherwise.
std::string mask_tail_value(const std::string& line, int base) {
    std::size_t eq = line.rfind(" = ");
    if (eq == std::string::npos) return line;
    std::string value = line.substr(eq + 3);
    if (!is_value_token(value, base)) return line;
    return line.substr(0, eq + 3) + kMasked;
}

}  // namespace

std::string oracle_product(const std::string& a, const std::string& b, int base) {
    check_base(base);
    auto da = digits_from(a, base);
    auto db = digits_from(b, base);
    std::vector<int> acc(1, 0);
    for (std::size_t i = 0; i < db.size(); ++i)
        acc = add(acc, shift_up(mul_digit(da, db[i], base), static_cast<int>(i)), base);
    return digits_to(acc, base);
}

std::string oracle_product(std::uint64_t a, std::uint64_t b, int base) {
    check_base(base);
    auto render = [base](std::uint64_t v) {
        if (v == 0) return std::string("0");
        std::string s;
        while (v) {
            s.insert(s.begin(), kDigitChars[v % static_cast<std::uint64_t>(base)]);
            v /= static_cast<std::uint64_t>(base);
        }
        return s;
    };
    return oracle_product(render(a), render(b), base);
}

MultInstance make_mult_instance(const std::string& a, const std::string& b, int base) {
    check_base(base);
    MultInstance inst;
    inst.base = base;
    auto da = digits_from(a, base);
    auto db = digits_from(b, base);
    inst.a = digits_to(da, base);
    inst.b = digits_to(db, base);
    inst.digits = static_cast<int>(da.size());

    std::vector<int> sum(1, 0);
    for (std::size_t i = 0; i < db.size(); ++i) {
        MultInstance::PartialProduct pp;
        pp.digit = kDigitChars[db[i]];
        pp.place = static_cast<int>(i);
        auto unshifted = mul_digit(da, db[i], base);
        pp.unshifted = digits_to(unshifted, base);
        auto shifted = shift_up(unshifted, pp.place);
        pp.shifted = digits_to(shifted, base);
        sum = add(sum, shifted, base);
        inst.partial_products.push_back(std::move(pp));
    }
    inst.product = digits_to(sum, base);

    if (inst.product != oracle_product(inst.a, inst.b, base))
        throw ValidationError("partial product summation does not match the product");
    return inst;
}

std::string render_template(const MultInstance& inst) {
    std::string out;
    out += "Multiply " + inst.a + " by " + inst.b + " using long multiplication";
    if (inst.base == 16) out += " in base 16";
    out += ".\n";
    out += "Partial products, one per digit of " + inst.b +
           " from least significant to most significant:\n";
    for (const auto& pp : inst.partial_products) {
        out += "Step " + std::to_string(pp.place + 1) + ": " + inst.a + " * " + pp.digit +
               " = " + pp.unshifted + "; shifted by " + std::to_string(pp.place) +
               (pp.place == 1 ? " place" : " places") + ": " + pp.shifted + "\n";
    }
    out += "Sum of the shifted partial products: ";
    for (std::size_t i = 0; i < inst.partial_products.size(); ++i) {
        if (i) out += " + ";
        out += inst.partial_products[i].shifted;
    }
    out += " = " + inst.product + "\n";
    out += "Final answer: " + inst.product + "\n";
    return out;
}

MaskPolicy mask_policy_for_base(int base) {
    return base == 16 ? MaskPolicy::hex : MaskPolicy::decimal;
}

std::string mask_solution(MaskPolicy policy, const std::string& text, const MultInstance& inst) {
    int base = inst.base;
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;

        if (line.rfind("Step ", 0) == 0) {
            if (policy == MaskPolicy::decimal) {
                // both the per-digit product and the shifted value
                std::size_t eq = line.find(" = ");
                std::size_t semi = line.find("; shifted by ", eq);
                std::size_t colon = line.rfind(": ");
                if (eq != std::string::npos && semi != std::string::npos &&
                    colon != std::string::npos && colon > semi) {
                    line = line.substr(0, eq + 3) + kMasked + line.substr(semi, colon + 2 - semi) +
                           kMasked;
                }
            }
        } else if (line.rfind("Sum of the shifted partial products: ", 0) == 0) {
            std::size_t head = std::string("Sum of the shifted partial products: ").size();
            std::size_t eq = line.rfind(" = ");
            if (eq != std::string::npos && eq >= head) {
                std::string summands = line.substr(head, eq - head);
                if (policy == MaskPolicy::decimal) {
                    std::string rebuilt;
                    std::size_t s = 0;
                    while (s <= summands.size()) {
                        std::size_t plus = summands.find(" + ", s);
                        std::string tok = summands.substr(
                            s, plus == std::string::npos ? std::string::npos : plus - s);
                        rebuilt += is_value_token(tok, base) ? std::string(kMasked) : tok;
                        if (plus == std::string::npos) break;
                        rebuilt += " + ";
                        s = plus + 3;
                    }
                    summands = rebuilt;
                }
                line = line.substr(0, head) + summands + " = " + kMasked;
            } else {
                line = mask_tail_value(line, base);
            }
        } else if (line.rfind("Final answer: ", 0) == 0) {
            line = std::string("Final answer: ") + kMasked;
        }
        out += line;
        if (pos <= text.size() && (nl != std::string::npos)) out += '\n';
    }
    return out;
}

std::string mult_task_name(int digits, int base) {
    return (base == 16 ? "hexmult" : "mult") + std::to_string(digits);
}

std::string mult_question(const MultInstance& inst) {
    if (inst.base == 16)
        return "Calculate the following question, where each number is represented in base 16: " +
               inst.a + " " + kTimes + " " + inst.b + ".";
    return "Calculate the following question: " + inst.a + " " + kTimes + " " + inst.b + ".";
}

std::optional<ParsedMultQuestion> parse_mult_question(const std::string& question) {
    if (question.rfind("Calculate the following question", 0) != 0) return std::nullopt;
    std::size_t colon = question.rfind(": ");
    if (colon == std::string::npos) return std::nullopt;
    std::string body = question.substr(colon + 2);
    if (!body.empty() && body.back() == '.') body.pop_back();
    std::string sep = std::string(" ") + kTimes + " ";
    std::size_t mid = body.find(sep);
    if (mid == std::string::npos) return std::nullopt;
    ParsedMultQuestion out;
    out.a = body.substr(0, mid);
    out.b = body.substr(mid + sep.size());
    out.base = question.find("base 16") != std::string::npos ? 16 : 10;
    if (out.a.empty() || out.b.empty()) return std::nullopt;
    for (char c : out.a + out.b)
        if (digit_of(c, out.base) < 0) return std::nullopt;
    return out;
}

std::vector<Problem> gen_mult_dataset(const ArithGenSpec& spec, std::uint64_t seed) {
    check_base(spec.base);
    if (spec.n < 1) throw ValidationError("n must be >= 1");
    if (spec.digits < 1) throw ValidationError("digits must be >= 1");

    // a small digit count can only host so many distinct pairs
    if (spec.digits <= 2) {
        double alphabet = spec.decimal_digits_only ? 10.0 : static_cast<double>(spec.base);
        double per_operand = (alphabet - 1.0) * std::pow(alphabet, spec.digits - 1);
        if (per_operand * per_operand < static_cast<double>(spec.n))
            throw ValidationError("not enough distinct operand pairs for requested n");
    }

    Rng rng(splitmix64(seed ^ fnv1a64(mult_task_name(spec.digits, spec.base))));
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<Problem> out;
    out.reserve(static_cast<std::size_t>(spec.n));
    std::string task = mult_task_name(spec.digits, spec.base);
    while (out.size() < static_cast<std::size_t>(spec.n)) {
        std::string a = random_operand(rng, spec.digits, spec.base, spec.decimal_digits_only);
        std::string b = random_operand(rng, spec.digits, spec.base, spec.decimal_digits_only);
        if (!seen.insert({a, b}).second) continue;
        MultInstance inst = make_mult_instance(a, b, spec.base);
        Problem p;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "-%05zu", out.size());
        p.id = task + idbuf;
        p.task = task;
        p.question = mult_question(inst);
        p.answer = inst.product;
        p.aliases = {inst.product};
        p.solution_steps = render_template(inst);
        p.metadata["digits"] = static_cast<double>(spec.digits);
        out.push_back(validate_problem(std::move(p)));
    }
    return out;
}

}  // namespace friction
