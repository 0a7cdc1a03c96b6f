#include "friction/text_norm.hpp"

#include <algorithm>
#include <cctype>

namespace friction {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

static bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (char c : s) {
        if (is_space(c)) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string upper_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string strip_outer_punct(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && !is_word_char(s[b])) ++b;
    while (e > b && !is_word_char(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize_answer(std::string_view s) {
    return lower_ascii(collapse_whitespace(strip_outer_punct(trim(s))));
}

static int digit_value(char c, int base) {
    if (c >= '0' && c <= '9') return c - '0';
    if (base == 16) {
        if (c >= 'a' && c <= 'f') return 10 + (c - 'a');
        if (c >= 'A' && c <= 'F') return 10 + (c - 'A');
    }
    return -1;
}

std::optional<std::string> canonical_number(std::string_view s, int base) {
    std::string t = trim(s);
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X') && base == 16)
        t = t.substr(2);
    if (t.empty()) return std::nullopt;
    std::string digits;
    digits.reserve(t.size());
    std::size_t since_comma = 0;
    bool grouped = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        char c = t[i];
        if (base == 10 && c == ',') {
            // thousands grouping only: 1-3 digits first, exactly 3 after
            if (since_comma == 0 || since_comma > 3) return std::nullopt;
            if (grouped && since_comma != 3) return std::nullopt;
            grouped = true;
            since_comma = 0;
            continue;
        }
        int v = digit_value(c, base);
        if (v < 0) return std::nullopt;
        ++since_comma;
        digits.push_back(base == 16 ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                                    : c);
    }
    if (grouped && since_comma != 3) return std::nullopt;
    if (digits.empty()) return std::nullopt;
    std::size_t nz = digits.find_first_not_of('0');
    if (nz == std::string::npos) return std::string("0");
    return digits.substr(nz);
}

bool numbers_equal(std::string_view a, std::string_view b, int base) {
    auto ca = canonical_number(a, base);
    auto cb = canonical_number(b, base);
    return ca && cb && *ca == *cb;
}

std::size_t numeral_token_len(std::string_view text, std::size_t pos, int base) {
    if (pos >= text.size() || digit_value(text[pos], base) < 0) return 0;
    std::size_t end = pos;
    while (end < text.size()) {
        if (digit_value(text[end], base) >= 0) {
            ++end;
            continue;
        }
        if (base == 10 && text[end] == ',') {
            // a comma joins only as thousands grouping: exactly 3 digits
            // follow, then a non-digit or another comma
            std::size_t run = 0;
            while (end + 1 + run < text.size() && digit_value(text[end + 1 + run], 10) >= 0)
                ++run;
            if (run == 3) {
                end += 4;
                continue;
            }
        }
        break;
    }
    // only keep the commas when the whole span is valid grouping; otherwise
    // the token is the plain digit run and the rest rescans separately
    if (text.substr(pos, end - pos).find(',') != std::string::npos &&
        !canonical_number(text.substr(pos, end - pos), 10)) {
        end = pos;
        while (end < text.size() && digit_value(text[end], 10) >= 0) ++end;
    }
    return end - pos;
}

}  // namespace friction
