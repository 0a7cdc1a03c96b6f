#ifndef FRICTION_SYNTHETIC_ARITH_HPP
#define FRICTION_SYNTHETIC_ARITH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "friction/types.hpp"

namespace friction {

/// One long-multiplication instance, fully decomposed in its base.
/// All numerals are rendered in `base` (uppercase A-F for base 16) with no
/// leading zeros.
struct MultInstance {
    std::string a;
    std::string b;
    int base = 10;
    int digits = 0;  // digit count of each operand

    struct PartialProduct {
        char digit = '0';       // digit of b, least significant first
        int place = 0;          // positional shift
        std::string unshifted;  // a * digit
        std::string shifted;    // unshifted * base^place
    };
    std::vector<PartialProduct> partial_products;
    std::string product;
};

/// Exact product of two numerals, schoolbook-multiplied digit by digit in
/// `base`. Accepts numerals of any length.
std::string oracle_product(const std::string& a, const std::string& b, int base);
std::string oracle_product(std::uint64_t a, std::uint64_t b, int base);

/// Decomposes a x b into per-digit partial products and their sum,
/// validating that the partial products re-sum to the product.
MultInstance make_mult_instance(const std::string& a, const std::string& b, int base);

/// Step-by-step solution text: one line per digit of b (low to high), a
/// summation line, and the final product line. Pure function of the
/// instance.
std::string render_template(const MultInstance& inst);

enum class MaskPolicy {
    decimal,  // mask partial products, the summation and the final product
    hex,      // mask only the summation result and the final product
};

MaskPolicy mask_policy_for_base(int base);

/// Applies the task's masking policy to a rendered solution. Idempotent.
std::string mask_solution(MaskPolicy policy, const std::string& text, const MultInstance& inst);

std::string mult_task_name(int digits, int base);

/// Question text for an instance. Base-16 questions state the base.
std::string mult_question(const MultInstance& inst);

/// Recovers (a, b, base) from a generated question. Used by feedback
/// masking to rebuild the partial products it must hide.
struct ParsedMultQuestion {
    std::string a;
    std::string b;
    int base = 10;
};
std::optional<ParsedMultQuestion> parse_mult_question(const std::string& question);

/// n distinct problems with oracle answers and template solutions,
/// deterministic in seed.
std::vector<Problem> gen_mult_dataset(const ArithGenSpec& spec, std::uint64_t seed);

}  // namespace friction

#endif
