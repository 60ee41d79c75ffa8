#include <catch2/catch_amalgamated.hpp>

#include "cowp/acquirer.hpp"
#include "cowp/monitor.hpp"

#include "support/fixtures.hpp"

using namespace cowp;

namespace {

struct Rig {
    DomainDescription domain = testutil::serve_water_domain();
    ProblemDescription problem = testutil::serve_water_problem(domain);
    NlPatternTable patterns =
        NlPatternTable::from_text(testutil::fixture_text("nl_patterns.txt"));
    MockRules rules = [] {
        MockRules r = MockRules::from_text(testutil::fixture_text("mock_kb.txt"));
        DomainDescription d = testutil::serve_water_domain();
        for (const auto& [type, parent] : d.types.entries) r.nouns.add_identifier(type);
        r.nouns.add("faucet");
        r.nouns.add("water");
        r.nouns.add("kitchen");
        return r;
    }();
    MockOracle oracle{rules};
    ExchangeLog log;
    Plan seven = plan(domain, problem).plan;
};

/// Scripted backend for exercising unusual completions.
class ScriptedOracle : public OracleBackend {
public:
    explicit ScriptedOracle(std::vector<std::string> completions)
        : completions_(std::move(completions)) {}
    std::string complete(const std::string&, PromptKind) override {
        if (next_ >= completions_.size()) return "Yes.";
        return completions_[next_++];
    }
    std::string tag() const override { return "scripted"; }

private:
    std::vector<std::string> completions_;
    size_t next_ = 0;
};

} // namespace

TEST_CASE("monitor flags the broken cup at the fill step") {
    Rig rig;
    FeasibilityVerdict v =
        monitor_plan(rig.seven, "Cup is broken", rig.oracle, rig.log, rig.patterns);
    REQUIRE_FALSE(v.feasible);
    CHECK(v.action.display_name() == "fill");
    CHECK(v.step_index == 4);
    // Exactly the prefix through the first No is queried.
    CHECK(v.queries == 5);
    CHECK(rig.log.size() == 5);
    CHECK_FALSE(v.exchange_id.empty());
}

TEST_CASE("monitor without a situation asks nothing") {
    Rig rig;
    FeasibilityVerdict v = monitor_plan(rig.seven, "", rig.oracle, rig.log, rig.patterns);
    CHECK(v.feasible);
    CHECK(v.queries == 0);
    CHECK(rig.log.size() == 0);
}

TEST_CASE("monitor passes benign situations") {
    Rig rig;
    FeasibilityVerdict v = monitor_plan(rig.seven, "Glass's color is green", rig.oracle,
                                        rig.log, rig.patterns);
    CHECK(v.feasible);
    CHECK(v.queries == rig.seven.size());
}

TEST_CASE("monitor resumes from the execution index") {
    Rig rig;
    // From the step after fill, nothing touches the broken cup prompt-wise
    // except move/place, which the rules leave suitable.
    FeasibilityVerdict v = monitor_plan(rig.seven, "Cup is broken", rig.oracle, rig.log,
                                        rig.patterns, 5);
    CHECK(v.feasible);
    CHECK(v.queries == 2);

    FeasibilityVerdict vacuous =
        monitor_plan(rig.seven, "Cup is broken", rig.oracle, rig.log, rig.patterns,
                     rig.seven.size());
    CHECK(vacuous.feasible);
    CHECK(vacuous.queries == 0);
    CHECK_THROWS_AS(monitor_plan(rig.seven, "x", rig.oracle, rig.log, rig.patterns,
                                 rig.seven.size() + 1),
                    Error);
}

TEST_CASE("monitor treats unparseable answers as infeasible") {
    Rig rig;
    ScriptedOracle scripted({"Maybe."});
    FeasibilityVerdict v =
        monitor_plan(rig.seven, "Cup is broken", scripted, rig.log, rig.patterns);
    REQUIRE_FALSE(v.feasible);
    CHECK(v.step_index == 0);
}

TEST_CASE("monitor with an always-yes oracle is constantly feasible") {
    Rig rig;
    AlwaysYesOracle yes;
    FeasibilityVerdict v =
        monitor_plan(rig.seven, "Cup is broken", yes, rig.log, rig.patterns);
    CHECK(v.feasible);
    CHECK(v.queries == rig.seven.size());
}

TEST_CASE("acquirer keeps exactly the classes the oracle grants") {
    Rig rig;
    GroundAction blocked =
        instantiate(*rig.domain.find_action("fill"), {"robot", "cup", "faucet", "kitchen"});
    std::vector<std::pair<std::string, std::string>> objects = {
        {"bowl", "bowl"}, {"fork", "fork"}, {"chair", "chair"}};
    DomainDescription d = rig.domain;
    d.types.ensure("fork");
    d.types.ensure("chair");
    auto facts = acquire_affordances(blocked, objects, d, rig.patterns, rig.oracle,
                                     rig.log);
    REQUIRE(facts.size() == 1);
    CHECK(facts[0].object_class == "bowl");
    CHECK(facts[0].action == "fill");
    CHECK(facts[0].role == 1);
    CHECK_FALSE(facts[0].provenance.empty());
    // One substitution prompt per candidate class.
    CHECK(rig.log.size() == 3);
}

TEST_CASE("acquirer requires available objects") {
    Rig rig;
    GroundAction blocked =
        instantiate(*rig.domain.find_action("fill"), {"robot", "cup", "faucet", "kitchen"});
    CHECK_THROWS_AS(acquire_affordances(blocked, {}, rig.domain, rig.patterns, rig.oracle,
                                        rig.log),
                    EmptyField);
}

TEST_CASE("acquirer returns empty when the oracle grants nothing") {
    Rig rig;
    GroundAction blocked =
        instantiate(*rig.domain.find_action("fill"), {"robot", "cup", "faucet", "kitchen"});
    DomainDescription d = rig.domain;
    d.types.ensure("fork");
    d.types.ensure("chair");
    auto facts = acquire_affordances(blocked, {{"fork", "fork"}, {"chair", "chair"}}, d,
                                     rig.patterns, rig.oracle, rig.log);
    CHECK(facts.empty());
}

TEST_CASE("acquirer skips classes already usable or already granted") {
    Rig rig;
    GroundAction blocked =
        instantiate(*rig.domain.find_action("fill"), {"robot", "cup", "faucet", "kitchen"});
    DomainDescription d =
        extend_action_to_class(rig.domain, AffordanceFact{"bowl", "fill", 1, ""}).domain;
    auto facts = acquire_affordances(blocked, {{"cup", "cup"}, {"bowl", "bowl"}}, d,
                                     rig.patterns, rig.oracle, rig.log);
    CHECK(facts.empty());
    CHECK(rig.log.size() == 0); // nothing needed asking
}

TEST_CASE("select_best picks the preferred container") {
    Rig rig;
    std::vector<PlanCandidate> candidates = {
        {"glass", Plan{}}, {"measuring_cup", Plan{}}, {"bowl", Plan{}}};
    SelectionResult res =
        select_best(candidates, "serving water", "the cup is dirty", rig.oracle, rig.log);
    CHECK(res.queried);
    CHECK_FALSE(res.fallback);
    CHECK(res.chosen.object_class == "glass");
    CHECK(rig.log.size() == 1);
}

TEST_CASE("select_best returns single candidates without asking") {
    Rig rig;
    SelectionResult res = select_best({{"bowl", Plan{}}}, "serving water",
                                      "the cup is dirty", rig.oracle, rig.log);
    CHECK_FALSE(res.queried);
    CHECK(res.chosen.object_class == "bowl");
    CHECK(rig.log.size() == 0);
    CHECK_THROWS_AS(select_best({}, "t", "s", rig.oracle, rig.log), EmptyField);
}

TEST_CASE("select_best falls back to the first candidate on unparseable output") {
    Rig rig;
    ScriptedOracle scripted({"Hmm, hard to say."});
    SelectionResult res =
        select_best({{"glass", Plan{}}, {"bowl", Plan{}}}, "serving water",
                    "the cup is dirty", scripted, rig.log);
    CHECK(res.queried);
    CHECK(res.fallback);
    CHECK(res.chosen.object_class == "glass");
}

TEST_CASE("select_best output is always a member of the candidates") {
    Rig rig;
    std::vector<PlanCandidate> candidates = {{"mug", Plan{}}, {"bowl", Plan{}}};
    SelectionResult res = select_best(candidates, "serving water", "the cup is dusty",
                                      rig.oracle, rig.log);
    bool member = false;
    for (const auto& c : candidates)
        if (c.object_class == res.chosen.object_class) member = true;
    CHECK(member);
}
