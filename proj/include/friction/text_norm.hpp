#ifndef FRICTION_TEXT_NORM_HPP
#define FRICTION_TEXT_NORM_HPP

#include <optional>
#include <string>
#include <string_view>

namespace friction {

bool is_word_char(char c);

std::string trim(std::string_view s);

/// Collapse every internal whitespace run to a single space.
std::string collapse_whitespace(std::string_view s);

std::string lower_ascii(std::string_view s);
std::string upper_ascii(std::string_view s);

/// Strip non-alphanumeric characters from both ends.
std::string strip_outer_punct(std::string_view s);

/// Normalization shared by answer scoring, alias masking and the rejection
/// sampler's novelty comparison: trim, strip surrounding punctuation,
/// collapse whitespace, casefold. "Correct" and "leaked" are the same
/// relation because both sides go through this.
std::string normalize_answer(std::string_view s);

/// Canonical digit string of a numeral in `base` (10 or 16): strips an
/// optional 0x prefix, thousands commas (base 10 only, strict groups of
/// three) and leading zeros, uppercases hex digits. Returns nullopt when
/// `s` is not a numeral in that base.
std::optional<std::string> canonical_number(std::string_view s, int base);

/// True when the two strings denote the same value in `base`.
bool numbers_equal(std::string_view a, std::string_view b, int base);

/// Length of the numeral token starting at text[pos] (0 when none). Commas
/// join the token only as thousands grouping: a comma followed by exactly
/// three digits.
std::size_t numeral_token_len(std::string_view text, std::size_t pos, int base);

}  // namespace friction

#endif
