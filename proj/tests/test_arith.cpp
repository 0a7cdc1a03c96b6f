#include <doctest.h>

#include <gmpxx.h>

#include <set>

#include "friction/rng.hpp"
#include "friction/synthetic_arith.hpp"
#include "friction/text_norm.hpp"

using namespace friction;

namespace {

// Independent arbitrary-precision oracle.
std::string gmp_product(const std::string& a, const std::string& b, int base) {
    mpz_class x(a, base);
    mpz_class y(b, base);
    mpz_class p = x * y;
    return upper_ascii(p.get_str(base));
}

// Re-parses a rendered template at the string level: shifted partial
// products and the final answer, independent of the renderer's structures.
struct Reparsed {
    std::vector<std::string> shifted;
    std::string final_answer;
};

Reparsed reparse(const std::string& text) {
    Reparsed out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("Step ", 0) == 0) {
            auto colon = line.rfind(": ");
            REQUIRE(colon != std::string::npos);
            out.shifted.push_back(line.substr(colon + 2));
        } else if (line.rfind("Final answer: ", 0) == 0) {
            out.final_answer = line.substr(std::string("Final answer: ").size());
        }
    }
    return out;
}

void check_resum(const MultInstance& inst) {
    Reparsed r = reparse(render_template(inst));
    mpz_class sum = 0;
    for (const auto& s : r.shifted) sum += mpz_class(s, inst.base);
    CHECK(upper_ascii(sum.get_str(inst.base)) == r.final_answer);
    CHECK(r.final_answer == gmp_product(inst.a, inst.b, inst.base));
}

}  // namespace

TEST_CASE("oracle_product basics") {
    CHECK(oracle_product(std::uint64_t{0}, std::uint64_t{987654}, 10) == "0");
    CHECK(oracle_product(std::uint64_t{7}, std::uint64_t{8}, 10) == "56");
    // A x A in base 16 is decimal 10*10 = 100 = 0x64
    CHECK(oracle_product("A", "A", 16) == "64");
}

TEST_CASE("oracle_product matches GMP on the quoted operands") {
    CHECK(oracle_product("19365", "12534", 10) == gmp_product("19365", "12534", 10));
    CHECK(oracle_product("78934", "62851", 10) == gmp_product("78934", "62851", 10));
    CHECK(oracle_product("69837", "17635", 16) == gmp_product("69837", "17635", 16));
    CHECK(oracle_product("19365", "12534", 10) == "242720910");
}

TEST_CASE("oracle_product matches GMP on random operands") {
    Rng rng(20260809);
    for (int trial = 0; trial < 2000; ++trial) {
        int base = (rng() & 1) ? 16 : 10;
        std::uint64_t a = rng() % 10000000ULL;
        std::uint64_t b = rng() % 10000000ULL;
        std::string sa = oracle_product(a, std::uint64_t{1}, base);  // render via oracle
        std::string sb = oracle_product(b, std::uint64_t{1}, base);
        CHECK(oracle_product(sa, sb, base) == gmp_product(sa, sb, base));
    }
}

TEST_CASE("render_template structure for the quoted decimal instance") {
    MultInstance inst = make_mult_instance("19365", "12534", 10);
    std::string text = render_template(inst);
    Reparsed r = reparse(text);
    CHECK(r.shifted.size() == 5);  // one line per digit of b
    CHECK(r.final_answer == "242720910");
    check_resum(inst);
    // low-to-high digit order with positional shifts
    CHECK(r.shifted[0] == "77460");
    CHECK(r.shifted[1] == "580950");
    CHECK(inst.partial_products[0].digit == '4');
    CHECK(inst.partial_products[4].digit == '1');
}

TEST_CASE("zero digit yields a zero partial product line") {
    MultInstance inst = make_mult_instance("123", "105", 10);
    Reparsed r = reparse(render_template(inst));
    CHECK(r.shifted[1] == "0");
    check_resum(inst);
}

TEST_CASE("re-parsed partial products re-sum to the product on random instances") {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        int base = (rng() & 1) ? 16 : 10;
        int digits = 1 + static_cast<int>(rng() % 6);
        ArithGenSpec spec{1, digits, base, false};
        auto problems = gen_mult_dataset(spec, rng());
        auto q = parse_mult_question(problems[0].question);
        REQUIRE(q.has_value());
        check_resum(make_mult_instance(q->a, q->b, q->base));
    }
}

TEST_CASE("decimal masking hides every partial product value and the final product") {
    MultInstance inst = make_mult_instance("19365", "12534", 10);
    std::string masked = mask_solution(MaskPolicy::decimal, render_template(inst), inst);

    std::istringstream in(masked);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("Step ", 0) == 0) {
            CHECK(line.find(" = [masked]; shifted by ") != std::string::npos);
            CHECK(line.rfind(": [masked]") == line.size() - 10);
        } else if (line.rfind("Sum of", 0) == 0) {
            for (const auto& pp : inst.partial_products)
                CHECK(line.find(pp.shifted) == std::string::npos);
            CHECK(line.rfind(" = [masked]") != std::string::npos);
        } else if (line.rfind("Final answer: ", 0) == 0) {
            CHECK(line == "Final answer: [masked]");
        }
    }
    // idempotent
    CHECK(mask_solution(MaskPolicy::decimal, masked, inst) == masked);
}

TEST_CASE("hex masking keeps partial products visible and hides only the summation") {
    MultInstance inst = make_mult_instance("69837", "17635", 16);
    std::string text = render_template(inst);
    std::string masked = mask_solution(MaskPolicy::hex, text, inst);

    Reparsed before = reparse(text);
    Reparsed after = reparse(masked);
    CHECK(after.shifted == before.shifted);  // all partial products intact
    CHECK(after.final_answer == "[masked]");
    std::istringstream in(masked);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("Sum of", 0) == 0) {
            for (const auto& pp : inst.partial_products)
                CHECK(line.find(pp.shifted) != std::string::npos);
            CHECK(line.rfind(" = [masked]") == line.size() - 11);
        }
    }
    CHECK(mask_solution(MaskPolicy::hex, masked, inst) == masked);
}

TEST_CASE("generator determinism and operand hygiene") {
    ArithGenSpec spec{50, 5, 16, false};
    auto a = gen_mult_dataset(spec, 99);
    auto b = gen_mult_dataset(spec, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(json(a[i]).dump() == json(b[i]).dump());

    auto c = gen_mult_dataset(spec, 100);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == c[i])) any_diff = true;
    CHECK(any_diff);

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : a) {
        auto q = parse_mult_question(p.question);
        REQUIRE(q.has_value());
        CHECK(q->base == 16);
        CHECK(q->a.size() == 5);
        CHECK(q->a[0] != '0');  // no leading zeros
        CHECK(q->b[0] != '0');
        CHECK(seen.insert({q->a, q->b}).second);  // distinct
        CHECK(upper_ascii(p.answer) == p.answer);  // uppercase hex
        CHECK(p.answer == gmp_product(q->a, q->b, 16));
        CHECK(p.task == "hexmult5");
        CHECK(p.metadata.at("digits") == 5.0);
    }
}

TEST_CASE("decimal-digits-only flag matches the quoted hex example alphabet") {
    ArithGenSpec spec{30, 5, 16, true};
    for (const auto& p : gen_mult_dataset(spec, 3)) {
        auto q = parse_mult_question(p.question);
        REQUIRE(q.has_value());
        for (char ch : q->a + q->b) CHECK((ch >= '0' && ch <= '9'));
    }
}

TEST_CASE("question templates") {
    MultInstance dec = make_mult_instance("19365", "12534", 10);
    CHECK(mult_question(dec) == "Calculate the following question: 19365 \xC3\x97 12534.");
    MultInstance hex = make_mult_instance("69837", "17635", 16);
    CHECK(mult_question(hex) ==
          "Calculate the following question, where each number is represented in base 16: 69837 "
          "\xC3\x97 17635.");
    auto q = parse_mult_question(mult_question(hex));
    REQUIRE(q.has_value());
    CHECK(q->a == "69837");
    CHECK(q->b == "17635");
    CHECK(q->base == 16);
}

TEST_CASE("single-digit case") {
    ArithGenSpec spec{5, 1, 10, false};
    auto problems = gen_mult_dataset(spec, 11);
    CHECK(problems.size() == 5);
    MultInstance inst = make_mult_instance("7", "8", 10);
    CHECK(inst.product == "56");
    CHECK(inst.partial_products.size() == 1);
}
