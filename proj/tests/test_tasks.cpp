#include <doctest.h>

#include <set>

#include "friction/errors.hpp"
#include "friction/model_gateway.hpp"
#include "friction/synthetic_arith.hpp"
#include "friction/tasks.hpp"
#include "friction/text_norm.hpp"

using namespace friction;

namespace {

std::string problem_line(const std::string& id, const std::string& answer,
                         const std::string& category = "") {
    Problem p;
    p.id = id;
    p.task = "triviaqa";
    p.question = "q-" + id;
    p.answer = answer;
    if (!category.empty()) p.category = category;
    return json(p).dump() + "\n";
}

ModelHandle scripted_fixed(std::vector<std::string> answers) {
    ModelHandle h;
    h.kind = ModelKind::scripted;
    h.name = "scripted";
    ScriptedBehavior s;
    s.mode = ScriptMode::fixed_script;
    s.answers_by_iteration = std::move(answers);
    h.script = s;
    return h;
}

}  // namespace

TEST_CASE("parse_dataset: order preserved, line numbers on errors") {
    std::string bytes;
    for (int i = 0; i < 100; ++i) bytes += problem_line("p" + std::to_string(i), "a");
    auto problems = parse_dataset(bytes, "triviaqa");
    REQUIRE(problems.size() == 100);
    for (int i = 0; i < 100; ++i) CHECK(problems[static_cast<std::size_t>(i)].id == "p" + std::to_string(i));

    SUBCASE("empty file") {
        CHECK_THROWS_AS(parse_dataset("", "triviaqa"), DatasetError);
        CHECK_THROWS_AS(parse_dataset("\n\n", "triviaqa"), DatasetError);
    }
    SUBCASE("malformed json carries the line number") {
        std::string bad = bytes + "{not json\n";
        try {
            parse_dataset(bad, "triviaqa");
            FAIL("expected DatasetError");
        } catch (const DatasetError& e) {
            CHECK(e.line() == 101);
        }
    }
    SUBCASE("answer not in choices carries the line number") {
        json j;
        j["id"] = "bad";
        j["task"] = "mmlu";
        j["question"] = "q";
        j["answer"] = "E";
        j["choices"] = json::array({{{"label", "A"}, {"text", "x"}},
                                    {{"label", "B"}, {"text", "y"}}});
        std::string bad = bytes + j.dump() + "\n";
        try {
            parse_dataset(bad, "mmlu");
            FAIL("expected DatasetError");
        } catch (const DatasetError& e) {
            CHECK(e.line() == 101);
        }
    }
    SUBCASE("duplicate ids rejected") {
        CHECK_THROWS_AS(parse_dataset(bytes + problem_line("p0", "a"), "triviaqa"),
                        DatasetError);
    }
}

TEST_CASE("subsample") {
    std::vector<Problem> dataset;
    for (int i = 0; i < 1000; ++i) {
        Problem p;
        p.id = "p" + std::to_string(i);
        p.task = "t";
        p.question = "q";
        p.answer = "a";
        dataset.push_back(validate_problem(std::move(p)));
    }

    SUBCASE("fraction 1.0 is the identity") {
        auto out = subsample(dataset, 1.0, 7);
        CHECK(out.size() == dataset.size());
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].id == dataset[i].id);
    }
    SUBCASE("10% of 1000 is 100, deterministic, order preserved") {
        auto a = subsample(dataset, 0.1, 7);
        auto b = subsample(dataset, 0.1, 7);
        REQUIRE(a.size() == 100);
        CHECK(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
        // relative order preserved: positions in the original are increasing
        std::size_t prev = 0;
        bool first = true;
        for (const auto& p : a) {
            std::size_t idx = static_cast<std::size_t>(std::stoi(p.id.substr(1)));
            if (!first) CHECK(idx > prev);
            prev = idx;
            first = false;
        }
    }
    SUBCASE("different seeds give different selections") {
        auto a = subsample(dataset, 0.1, 7);
        auto b = subsample(dataset, 0.1, 8);
        bool differ = false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].id != b[i].id) differ = true;
        CHECK(differ);
    }
    SUBCASE("ceil rounding") {
        CHECK(subsample(dataset, 0.0005, 7).size() == 1);  // ceil(0.5)
    }
}

TEST_CASE("assemble_fewshot") {
    std::vector<Problem> dataset;
    for (int i = 0; i < 30; ++i) {
        Problem p;
        p.id = "p" + std::to_string(i);
        p.task = "mmlu";
        p.question = "q";
        p.choices = {{"A", "x"}, {"B", "y"}};
        p.answer = "A";
        p.category = (i % 2 == 0) ? "physics" : "history";
        dataset.push_back(validate_problem(std::move(p)));
    }
    TaskSpec spec = task_spec_for("mmlu");
    REQUIRE(spec.categorized);

    SUBCASE("k=0 gives an empty list") {
        CHECK(assemble_fewshot(dataset, dataset[0], 0, spec, 1).empty());
    }
    SUBCASE("category matched and self excluded across seeds") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto ex = assemble_fewshot(dataset, dataset[0], 5, spec, seed);
            REQUIRE(ex.size() == 5);
            std::set<std::string> ids;
            for (const auto& e : ex) {
                CHECK(e.category == dataset[0].category);  // all "physics"
                CHECK(e.id != dataset[0].id);
                CHECK(ids.insert(e.id).second);  // without replacement
            }
        }
    }
    SUBCASE("insufficient exemplars") {
        CHECK_THROWS_AS(assemble_fewshot(dataset, dataset[0], 15, spec, 1), DatasetError);
    }
    SUBCASE("uncategorized tasks draw from the whole pool") {
        TaskSpec open = task_spec_for("triviaqa");
        auto ex = assemble_fewshot(dataset, dataset[0], 20, open, 3);
        CHECK(ex.size() == 20);
    }
}

TEST_CASE("parse_answer: multiple choice") {
    TaskSpec spec = task_spec_for("mmlu");
    CHECK(parse_answer("The answer is (B).", spec) == "B");
    CHECK(parse_answer("I pick (B) because...final answer: B", spec) == "B");
    CHECK(parse_answer("so \\boxed{C} holds", spec) == "C");
    CHECK(parse_answer("maybe D, but actually \\boxed{(A)}", spec) == "A");
    CHECK(parse_answer("", spec) == "");
    CHECK(parse_answer("no labels here", spec) == "");
    // word-internal letters are not labels
    CHECK(parse_answer("Assume nothing. B is right.", spec) == "B");
}

TEST_CASE("parse_answer: numeric boxed") {
    TaskSpec spec = task_spec_for("math500");
    CHECK(parse_answer("...so \\boxed{42}.", spec) == "42");
    CHECK(parse_answer("\\boxed{\\frac{1}{2}}", spec) == "\\frac{1}{2}");  // balanced braces
    CHECK(parse_answer("first 7 then 13 wins", spec) == "13");
    CHECK(parse_answer("answer: 1,234,567.", spec) == "1,234,567");
    CHECK(parse_answer("", spec) == "");

    TaskSpec hex = task_spec_for("hexmult5");
    CHECK(hex.numeric_base == 16);
    CHECK(parse_answer("the product is AB3F", hex) == "AB3F");
    CHECK(parse_answer("\\boxed{0A2B}", hex) == "0A2B");
}

TEST_CASE("parse_answer: open ended") {
    TaskSpec spec = task_spec_for("triviaqa");
    CHECK(parse_answer("Thinking...\nAnswer: Paris\nthanks", spec) == "Paris");
    CHECK(parse_answer("final answer: Paris, France", spec) == "Paris, France");
    CHECK(parse_answer("no marker\njust lines\nlast line", spec) == "last line");
    CHECK(parse_answer("", spec) == "");
}

TEST_CASE("parse_answer returns a substring or empty") {
    for (const char* task : {"mmlu", "math500", "triviaqa", "hexmult5"}) {
        TaskSpec spec = task_spec_for(task);
        for (const std::string raw :
             {"", "Answer: B", "\\boxed{12}", "text 1,2 odd commas", "((A))", "Answer:"}) {
            std::string parsed = parse_answer(raw, spec);
            CHECK((parsed.empty() || raw.find(parsed) != std::string::npos));
        }
    }
}

TEST_CASE("score") {
    SUBCASE("open ended alias casefold") {
        Problem p;
        p.id = "t1";
        p.task = "triviaqa";
        p.question = "q";
        p.answer = "Paris";
        p.aliases = {"Paris", "Paris, France"};
        p = validate_problem(std::move(p));
        TaskSpec spec = task_spec_for("triviaqa");
        CHECK(score("paris", p, spec));
        CHECK(score("PARIS, FRANCE", p, spec));
        CHECK(!score("London", p, spec));
        CHECK(!score("", p, spec));
    }
    SUBCASE("multiple choice exact label") {
        Problem p;
        p.id = "m1";
        p.task = "mmlu";
        p.question = "q";
        p.choices = {{"B", "x"}, {"C", "y"}};
        p.answer = "C";
        p = validate_problem(std::move(p));
        TaskSpec spec = task_spec_for("mmlu");
        CHECK(!score("B", p, spec));
        CHECK(score("C", p, spec));
    }
    SUBCASE("numeric value equality") {
        Problem p;
        p.id = "n1";
        p.task = "math500";
        p.question = "q";
        p.answer = "42";
        p = validate_problem(std::move(p));
        TaskSpec spec = task_spec_for("math500");
        CHECK(score("042", p, spec));
        CHECK(score("42", p, spec));
        CHECK(!score("420", p, spec));
    }
    SUBCASE("hex value equality is case-insensitive") {
        Problem p;
        p.id = "h1";
        p.task = "hexmult5";
        p.question = "q";
        p.answer = "AB3F";
        p = validate_problem(std::move(p));
        TaskSpec spec = task_spec_for("hexmult5");
        CHECK(score("ab3f", p, spec));
        CHECK(score("0AB3F", p, spec));
        CHECK(!score("AB40", p, spec));
    }
    SUBCASE("ground truth always scores correct under its own metric") {
        auto problems = gen_mult_dataset(ArithGenSpec{25, 4, 16, false}, 5);
        TaskSpec spec = task_spec_for("hexmult4");
        for (const auto& p : problems) CHECK(score(p.answer, p, spec));
    }
}

TEST_CASE("judge_score") {
    Problem p;
    p.id = "j1";
    p.task = "popqa";
    p.question = "Largest planet?";
    p.answer = "Jupiter";
    p = validate_problem(std::move(p));
    Rng rng(1);

    SUBCASE("exact match short-circuits without a judge call") {
        gateway_reset_call_count();
        ModelHandle judge = scripted_fixed({"NO"});
        CHECK(judge_score("jupiter", p, judge, rng));
        CHECK(gateway_call_count() == 0);
    }
    SUBCASE("scripted YES verdict") {
        ModelHandle judge = scripted_fixed({"YES"});
        CHECK(judge_score("the planet Jupiter", p, judge, rng));
    }
    SUBCASE("scripted NO verdict") {
        ModelHandle judge = scripted_fixed({"NO"});
        CHECK(!judge_score("Saturn", p, judge, rng));
    }
    SUBCASE("garbage verdict falls back to alias match") {
        ModelHandle judge = scripted_fixed({"banana banana"});
        CHECK(!judge_score("Saturn", p, judge, rng));
        ModelHandle confused = scripted_fixed({"YES NO"});  // both present: malformed
        CHECK(!judge_score("Saturn", p, confused, rng));
    }
}
