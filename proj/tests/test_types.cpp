#include <doctest.h>

#include "friction/errors.hpp"
#include "friction/types.hpp"

using namespace friction;

namespace {

Problem mc_problem() {
    Problem p;
    p.id = "mmlu-0001";
    p.task = "mmlu";
    p.question = "Which planet is largest?";
    p.choices = {{"A", "Earth"}, {"B", "Jupiter"}, {"C", "Mars"}, {"D", "Venus"}};
    p.answer = "B";
    p.category = "astronomy";
    return p;
}

Trajectory sample_trajectory() {
    Trajectory t;
    t.problem_id = "p1";
    IterationRecord r0;
    r0.iteration = 0;
    r0.raw_output = "Answer: wrong";
    r0.parsed_answer = "wrong";
    r0.correct = false;
    r0.feedback = "Your answer was incorrect. Please answer the question again.";
    IterationRecord r1;
    r1.iteration = 1;
    r1.raw_output = "Answer: right";
    r1.parsed_answer = "right";
    r1.correct = true;
    r1.temperature = 0.15;
    r1.token_logprobs = std::vector<TokenLogprob>{{"Answer:", -0.1}, {"right", -0.2}};
    t.records = {r0, r1};
    t.solved_at = 1;
    t.status = TrajectoryStatus::solved;
    return t;
}

template <typename T>
void check_roundtrip(const T& value) {
    std::string once = json(value).dump();
    T parsed = json::parse(once).get<T>();
    std::string twice = json(parsed).dump();
    CHECK(once == twice);
    CHECK(parsed == value);
}

}  // namespace

TEST_CASE("validate_problem accepts a well-formed problem") {
    Problem p = validate_problem(mc_problem());
    CHECK(p.aliases.count("B") == 1);  // invariant closure
}

TEST_CASE("validate_problem rejects an answer outside the choices") {
    Problem p = mc_problem();
    p.answer = "E";
    CHECK_THROWS_AS(validate_problem(p), ValidationError);
}

TEST_CASE("validate_problem rejects empty answers and duplicate labels") {
    Problem p = mc_problem();
    p.answer = "";
    CHECK_THROWS_AS(validate_problem(p), ValidationError);

    Problem q = mc_problem();
    q.choices.push_back({"B", "again"});
    CHECK_THROWS_AS(validate_problem(q), ValidationError);
}

TEST_CASE("validate_problem inserts the answer into aliases") {
    Problem p = mc_problem();
    p.aliases = {"Jupiter"};
    Problem out = validate_problem(p);
    CHECK(out.aliases.count("B") == 1);
    CHECK(out.aliases.count("Jupiter") == 1);
}

TEST_CASE("trajectory invariants") {
    Trajectory t = sample_trajectory();
    CHECK_NOTHROW(validate_trajectory(t));

    SUBCASE("records non-empty unless aborted") {
        t.records.clear();
        t.solved_at.reset();
        t.status = TrajectoryStatus::exhausted;
        CHECK_THROWS_AS(validate_trajectory(t), ValidationError);
        t.status = TrajectoryStatus::aborted;
        t.abort_reason = "model_unavailable";
        CHECK_NOTHROW(validate_trajectory(t));
    }
    SUBCASE("iterations strictly increasing from 0") {
        t.records[1].iteration = 2;
        CHECK_THROWS_AS(validate_trajectory(t), ValidationError);
    }
    SUBCASE("correct record must be last") {
        t.records[0].correct = true;
        t.records[0].feedback.reset();
        CHECK_THROWS_AS(validate_trajectory(t), ValidationError);
    }
    SUBCASE("solved_at set iff solved") {
        t.solved_at.reset();
        CHECK_THROWS_AS(validate_trajectory(t), ValidationError);
    }
    SUBCASE("feedback required on followed incorrect records") {
        t.records[0].feedback.reset();
        CHECK_THROWS_AS(validate_trajectory(t), ValidationError);
    }
    SUBCASE("no feedback on the final record of a finished run") {
        Trajectory u = sample_trajectory();
        u.records[1].correct = false;
        u.records[1].feedback = "dangling";
        u.solved_at.reset();
        u.status = TrajectoryStatus::exhausted;
        CHECK_THROWS_AS(validate_trajectory(u), ValidationError);
        u.status = TrajectoryStatus::aborted;  // abort may cut the loop short
        u.abort_reason = "model_unavailable";
        CHECK_NOTHROW(validate_trajectory(u));
    }
}

TEST_CASE("JSON round trips are byte-exact") {
    check_roundtrip(validate_problem(mc_problem()));
    check_roundtrip(sample_trajectory());

    ScriptedBehavior script;
    script.mode = ScriptMode::obey_with_probability;
    script.obey_probability = 0.3;
    script.initial_correct_probability = 0.4;

    ModelHandle handle;
    handle.kind = ModelKind::scripted;
    handle.name = "obey";
    handle.script = script;
    check_roundtrip(handle);

    RunConfig cfg;
    cfg.solver_model = handle;
    cfg.feedback_mechanism = FeedbackMechanism::F1;
    cfg.task.name = "mult5";
    cfg.task.generator = ArithGenSpec{450, 5, 10, false};
    cfg.seed = 1234;
    check_roundtrip(cfg);

    ErrorCategory cat{"p1", CategoryLabel::FR, "o4-mini", "did not incorporate feedback"};
    check_roundtrip(cat);

    ChatExchange chat;
    chat.messages = {{"system", "be brief"}, {"user", "2+2?"}};
    chat.temperature = 0.45;
    chat.n = 25;
    chat.want_logprobs = true;
    chat.completions = {{"4", std::vector<TokenLogprob>{{"4", -0.01}}}};
    check_roundtrip(chat);

    TrajectoryLogLine line;
    line.run_id = "abc123";
    line.problem_id = "p1";
    line.record = sample_trajectory().records[0];
    line.wall_clock = "2026-08-09T00:00:00.000Z";
    line.seq = 7;
    line.final = TrajectoryFinal{TrajectoryStatus::solved, 1, std::nullopt};
    check_roundtrip(line);
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    cfg.solver_model.kind = ModelKind::scripted;
    cfg.solver_model.name = "s";
    cfg.solver_model.script = ScriptedBehavior{};
    cfg.solver_model.script->answers_by_iteration = {"x"};
    cfg.task.name = "t";
    cfg.task.dataset_path = "d.jsonl";
    CHECK_NOTHROW(validate_run_config(cfg));

    SUBCASE("K >= 1") {
        cfg.max_iterations = 0;
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
    }
    SUBCASE("subsample fraction in (0,1]") {
        cfg.subsample_fraction = 0.0;
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
        cfg.subsample_fraction = 1.5;
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
    }
    SUBCASE("rejection candidates >= 1") {
        cfg.rejection_candidates = 0;
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
    }
    SUBCASE("F3 needs a distinct feedback model") {
        cfg.feedback_mechanism = FeedbackMechanism::F3;
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
        cfg.feedback_model = cfg.solver_model;
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
        cfg.feedback_model->name = "strong";
        cfg.feedback_model->script->answers_by_iteration = {"feedback"};
        CHECK_NOTHROW(validate_run_config(cfg));
    }
    SUBCASE("exactly one of dataset path and generator") {
        cfg.task.generator = ArithGenSpec{};
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
        cfg.task.dataset_path.clear();
        CHECK_NOTHROW(validate_run_config(cfg));
        cfg.task.generator.reset();
        CHECK_THROWS_AS(validate_run_config(cfg), ValidationError);
    }
}
