#include <catch2/catch_amalgamated.hpp>

#include "cowp/nl.hpp"
#include "cowp/oracle.hpp"

#include "support/fixtures.hpp"

using namespace cowp;

namespace {

NlPatternTable patterns() {
    return NlPatternTable::from_text(testutil::fixture_text("nl_patterns.txt"));
}

SituationLexicon lexicon() {
    return SituationLexicon::from_text(testutil::fixture_text("situation_lexicon.txt"));
}

MockRules kb_rules() {
    MockRules rules = MockRules::from_text(testutil::fixture_text("mock_kb.txt"));
    // Loaders merge domain/catalog nouns into the rule set; do the same here.
    DomainDescription d = testutil::serve_water_domain();
    for (const auto& [type, parent] : d.types.entries) rules.nouns.add_identifier(type);
    rules.nouns.add("water");
    rules.nouns.add("faucet");
    rules.nouns.add("kitchen");
    rules.nouns.add("sink");
    return rules;
}

GroundAction fill_cup() {
    DomainDescription d = testutil::serve_water_domain();
    return instantiate(*d.find_action("fill"), {"robot", "cup", "faucet", "kitchen"});
}

} // namespace

TEST_CASE("action_to_nl renders the registered sentence patterns") {
    NlPatternTable table = patterns();
    CHECK(table.render(fill_cup()) == "fill a cup with water");

    DomainDescription d = testutil::serve_water_domain();
    GroundAction grasp = instantiate(*d.find_action("grasp"), {"robot", "cup", "kitchen"});
    CHECK(table.render(grasp) == "grasp a cup");

    GroundAction unknown;
    unknown.schema = "teleport";
    CHECK_THROWS_AS(table.render(unknown), MissingPattern);
}

TEST_CASE("action_to_nl voices clones through their base pattern") {
    NlPatternTable table = patterns();
    GroundAction bowl_fill;
    bowl_fill.schema = "fill__bowl";
    bowl_fill.binding = {"robot", "bowl", "faucet", "kitchen"};
    CHECK(table.render(bowl_fill) == "fill a bowl with water");
    CHECK(table.render_with(bowl_fill, 1, "measuring_cup") ==
          "fill a measuring cup with water");
    CHECK(table.mentions_role("fill", 1));
    CHECK_FALSE(table.mentions_role("fill", 2));
}

TEST_CASE("feasibility prompt matches the worked example character for character") {
    CHECK(render_feasibility_prompt("fill a cup with water", "the cup is broken") ==
          "Is it suitable for a robot to fill a cup with water, if the cup is broken?");
    CHECK(render_feasibility_prompt("grasp a cup", "the cup is dirty") ==
          "Is it suitable for a robot to grasp a cup, if the cup is dirty?");
    CHECK_THROWS_AS(render_feasibility_prompt("", "the cup is broken"), EmptyField);
    CHECK_THROWS_AS(render_feasibility_prompt("grasp a cup", " "), EmptyField);
}

TEST_CASE("affordance prompt matches the worked example character for character") {
    CHECK(render_affordance_prompt("fill a bowl with water") ==
          "Is it suitable for a robot to fill a bowl with water?");
    CHECK(render_affordance_prompt("fill a pan with water") ==
          "Is it suitable for a robot to fill a pan with water?");
    CHECK_THROWS_AS(render_affordance_prompt(""), EmptyField);
}

TEST_CASE("selection prompt joins the object list with a trailing and") {
    CHECK(render_selection_prompt({"glass", "measuring cup", "bowl"}, "serving water",
                                  "cup is dirty") ==
          "There are some objects, such as glass, measuring cup, and bowl. Which is the "
          "most suitable for serving water, if cup is dirty?");
    CHECK(render_selection_prompt({"x", "y"}, "t", "s").find("such as x, and y") !=
          std::string::npos);
    CHECK_THROWS_AS(render_selection_prompt({"glass"}, "t", "s"), TooFewObjects);

    auto options = selection_options(render_selection_prompt(
        {"glass", "measuring cup", "bowl"}, "serving water", "cup is dirty"));
    CHECK(options == std::vector<std::string>{"glass", "measuring cup", "bowl"});
}

TEST_CASE("situation_clause normalizes dataset wording for prompts") {
    CHECK(situation_clause("Cup is broken.") == "the cup is broken");
    CHECK(situation_clause("The faucet is leaking.") == "the faucet is leaking");
    CHECK(situation_clause("There is a power outage") == "there is a power outage");
    CHECK(situation_clause("Kitchen door is locked and cannot be opened.") ==
          "the kitchen door is locked and cannot be opened");
}

TEST_CASE("parse_verdict keys off the leading token") {
    CHECK(parse_verdict("Yes, of course.", PromptKind::Feasibility).yes());
    CHECK(parse_verdict("  no - the cup is broken", PromptKind::Feasibility).no());
    CHECK(parse_verdict("Maybe.", PromptKind::Feasibility).kind ==
          Verdict::Kind::Unparseable);
    CHECK(parse_verdict("", PromptKind::Feasibility).kind == Verdict::Kind::Unparseable);

    Verdict choice = parse_verdict("I would suggest the glass here.",
                                   PromptKind::Selection,
                                   {"glass", "measuring cup", "bowl"});
    CHECK(choice.kind == Verdict::Kind::Choice);
    CHECK(choice.choice == "glass");
    CHECK(parse_verdict("none of those", PromptKind::Selection, {"glass", "bowl"}).kind ==
          Verdict::Kind::Unparseable);
}

TEST_CASE("every completion maps to exactly one verdict") {
    const char* samples[] = {"Yes.", "no", "Yes, but...", "Certainly", "", "42",
                             "No no no", "yes\nno", "?", "bowl"};
    for (const char* s : samples) {
        Verdict v = parse_verdict(s, PromptKind::Feasibility);
        bool classified = v.kind == Verdict::Kind::Yes || v.kind == Verdict::Kind::No ||
                          v.kind == Verdict::Kind::Unparseable;
        CHECK(classified);
    }
}

TEST_CASE("mock oracle answers the worked feasibility example with No") {
    MockOracle oracle(kb_rules());
    ExchangeLog log;
    auto ex = query(oracle, log,
                    render_feasibility_prompt("fill a cup with water",
                                              "the cup is broken"),
                    PromptKind::Feasibility);
    CHECK(ex.verdict.no());
    CHECK(ex.backend == "mock");

    // The same defect on a different container does not transfer.
    auto other = query(oracle, log,
                       render_feasibility_prompt("fill a bowl with water",
                                                 "the cup is broken"),
                       PromptKind::Feasibility);
    CHECK(other.verdict.yes());

    // Supply failures hit every fill, whatever the container.
    auto supply = query(oracle, log,
                        render_feasibility_prompt("fill a bowl with water",
                                                  "the faucet has no water"),
                        PromptKind::Feasibility);
    CHECK(supply.verdict.no());
    CHECK(log.size() == 3);
}

TEST_CASE("mock oracle grants the bowl affordance") {
    MockOracle oracle(kb_rules());
    ExchangeLog log;
    auto ex = query(oracle, log, render_affordance_prompt("fill a bowl with water"),
                    PromptKind::Affordance);
    CHECK(ex.verdict.yes());
    auto no = query(oracle, log, render_affordance_prompt("fill a fork with water"),
                    PromptKind::Affordance);
    CHECK(no.verdict.no());
}

TEST_CASE("mock oracle selects by task preference") {
    MockOracle oracle(kb_rules());
    ExchangeLog log;
    auto ex = query(oracle, log,
                    render_selection_prompt({"measuring cup", "bowl", "glass"},
                                            "serving water", "the cup is dirty"),
                    PromptKind::Selection);
    REQUIRE(ex.verdict.kind == Verdict::Kind::Choice);
    CHECK(ex.verdict.choice == "glass");

    // No preference entry: first listed option.
    auto fallback = query(oracle, log,
                          render_selection_prompt({"fork", "spoon"}, "juggling",
                                                  "the cup is dirty"),
                          PromptKind::Selection);
    REQUIRE(fallback.verdict.kind == Verdict::Kind::Choice);
    CHECK(fallback.verdict.choice == "fork");
}

TEST_CASE("mock verdicts are deterministic") {
    MockRules rules = kb_rules();
    std::string prompt =
        render_feasibility_prompt("fill a cup with water", "the cup is dusty");
    for (int i = 0; i < 3; ++i) {
        MockOracle oracle(rules);
        ExchangeLog log;
        CHECK(query(oracle, log, prompt, PromptKind::Feasibility).verdict.no());
    }
}

TEST_CASE("always-yes oracle never blocks") {
    AlwaysYesOracle oracle;
    ExchangeLog log;
    CHECK(query(oracle, log,
                render_feasibility_prompt("fill a cup with water", "the cup is broken"),
                PromptKind::Feasibility)
              .verdict.yes());
}

TEST_CASE("replay oracle reproduces and detects divergence") {
    MockOracle mock(kb_rules());
    ExchangeLog log;
    std::string p1 = render_feasibility_prompt("grasp a cup", "the cup is dirty");
    std::string p2 = render_affordance_prompt("fill a bowl with water");
    auto e1 = query(mock, log, p1, PromptKind::Feasibility);
    auto e2 = query(mock, log, p2, PromptKind::Affordance);

    ReplayOracle replay(log.snapshot());
    ExchangeLog log2;
    CHECK(query(replay, log2, p1, PromptKind::Feasibility).verdict == e1.verdict);
    CHECK(query(replay, log2, p2, PromptKind::Affordance).verdict == e2.verdict);
    CHECK(replay.exhausted());

    ReplayOracle replay2(log.snapshot());
    ExchangeLog log3;
    CHECK_THROWS_AS(query(replay2, log3, p2, PromptKind::Affordance), TransportError);
}

TEST_CASE("situation_to_predicate symbolizes the dirty cup") {
    DomainDescription d = testutil::serve_water_domain();
    SituationLexicon lex = lexicon();
    auto sym = situation_to_predicate("Cup is dirty", d, lex);
    CHECK(sym.literal == Literal{"is_dirty", {"cup"}, false});
    CHECK(sym.fresh_predicate);
    CHECK(sym.subject == "cup");
}

TEST_CASE("situation_to_predicate covers the listed situation wordings") {
    DomainDescription d = testutil::serve_water_domain();
    SituationLexicon lex = lexicon();
    CHECK(situation_to_predicate("Glass is broken.", d, lex).literal ==
          Literal{"is_broken", {"glass"}, false});
    CHECK(situation_to_predicate("Faucet has no water.", d, lex).literal ==
          Literal{"has_no_water", {"faucet"}, false});
    CHECK(situation_to_predicate("Kitchen door is locked and cannot be opened.", d,
                                 lex).literal ==
          Literal{"is_locked", {"kitchen"}, false});
    // Unlisted wording still symbolizes through the is_/has_ fallback.
    CHECK(situation_to_predicate("Cup is upside down", d, lex).literal ==
          Literal{"is_upside_down", {"cup"}, false});
}

TEST_CASE("situation_to_predicate rejects unknown subjects") {
    DomainDescription d = testutil::serve_water_domain();
    SituationLexicon lex = lexicon();
    CHECK_THROWS_AS(situation_to_predicate("Xyzzy happens", d, lex),
                    UnmappableSituation);
    CHECK_THROWS_AS(situation_to_predicate("  ", d, lex), EmptyField);
}

TEST_CASE("noun lexicon prefers the longest phrase at a position") {
    NounLexicon nouns;
    nouns.add("cup");
    nouns.add("measuring cup");
    CHECK(nouns.subject_of("The measuring cup is dusty") == "measuring_cup");
    CHECK(nouns.subject_of("The cup is dusty") == "cup");
    CHECK_FALSE(nouns.subject_of("nothing here").has_value());
}
