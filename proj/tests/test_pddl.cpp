#include <catch2/catch_amalgamated.hpp>

#include "cowp/pddl.hpp"
#include "cowp/pddl_parser.hpp"
#include "cowp/pddl_printer.hpp"
#include "cowp/rng.hpp"

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace cowp;

namespace {

// The container-filling action exactly as rendered in the bundled domain.
const char* kFillOnlyDomain = R"((define (domain fill_only)
    (:requirements :strips :typing :negative-preconditions)
    (:types robot cup faucet location - object)
    (:predicates
        (is_grasped ?x - object)
        (is_empty ?x - object)
        (is_filled ?x - object)
        (faucet_at ?f - faucet ?l - location)
        (is_on ?f - faucet)
        (is_off ?f - faucet)
        (robot_at ?r - robot ?l - location))
    (:action fill
        :parameters
        (?r - robot ?c - cup
         ?f - faucet ?l - location)
        :precondition
        (and (is_grasped ?c)
             (is_empty ?c)
             (faucet_at ?f ?l)
             (is_on ?f)
             (robot_at ?r ?l))
        :effect
        (and (is_filled ?c)
             (not (is_on ?f))
             (is_off ?f)))
))";

} // namespace

TEST_CASE("parse_domain reads the fill action with its exact shape") {
    DomainDescription d = parse_domain(kFillOnlyDomain);
    REQUIRE(d.name == "fill_only");
    REQUIRE(d.actions.size() == 1);
    const ActionSchema& fill = d.actions[0];
    CHECK(fill.name == "fill");
    CHECK(fill.params.size() == 4);
    CHECK(fill.precondition.conjuncts.size() == 5);
    CHECK(fill.effect.conjuncts.size() == 3);
    CHECK(fill.params[1] == std::pair<std::string, std::string>{"?c", "cup"});
    CHECK(fill.effect.contains(Literal{"is_on", {"?f"}, true}));
}

TEST_CASE("parse_domain accepts the empty domain") {
    DomainDescription d = parse_domain("(define (domain d))");
    CHECK(d.name == "d");
    CHECK(d.actions.empty());
    CHECK(d.predicates.empty());
}

TEST_CASE("parse_domain rejects unbound effect variables") {
    std::string source = kFillOnlyDomain;
    // Drop ?c from the parameter list; the body still uses it.
    auto pos = source.find("(?r - robot ?c - cup");
    REQUIRE(pos != std::string::npos);
    source.replace(pos, std::string("(?r - robot ?c - cup").size(), "(?r - robot");
    REQUIRE_THROWS_AS(parse_domain(source), SemanticError);
}

TEST_CASE("parse_domain normalizes identifier case") {
    DomainDescription d = parse_domain(
        "(define (domain Mixed) (:predicates (Is_Dirty ?X - object)))");
    CHECK(d.name == "mixed");
    CHECK(d.predicates[0].name == "is_dirty");
    CHECK(d.predicates[0].params[0].first == "?x");
}

TEST_CASE("parse_domain rejects unsupported constructs") {
    CHECK_THROWS_AS(
        parse_domain("(define (domain d) (:requirements :adl))"), SemanticError);
    CHECK_THROWS_AS(
        parse_domain("(define (domain d) (:predicates (p)) "
                     "(:action a :parameters () :precondition (or (p)) :effect (p)))"),
        SemanticError);
    CHECK_THROWS_AS(
        parse_domain("(define (domain d) (:functions (cost)))"), SemanticError);
    CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p)) "
                                 "(:action a :parameters () "
                                 ":precondition (and (p)) :effect (and (p) (not (p)))))"),
                    SemanticError);
}

TEST_CASE("parse_domain reports positions for malformed text") {
    try {
        parse_domain("(define (domain d)\n  (:predicates (p)\n)");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 1);
    }
}

TEST_CASE("parse_problem types the bundled serve-water objects") {
    DomainDescription d = testutil::serve_water_domain();
    ProblemDescription p = testutil::serve_water_problem(d);
    REQUIRE(p.objects.size() == 6);
    CHECK(p.object_type("cup") == "cup");
    CHECK(p.object_type("dining") == "location");
    CHECK(p.goal.contains(Literal{"water_served", {}, false}));
}

TEST_CASE("parse_problem accepts an empty init") {
    DomainDescription d = parse_domain("(define (domain d) (:predicates (p)))");
    ProblemDescription p =
        parse_problem("(define (problem e) (:domain d) (:init) (:goal (and (p))))", d);
    CHECK(p.init.empty());
}

TEST_CASE("parse_problem rejects a goal over an undeclared predicate") {
    DomainDescription d = parse_domain("(define (domain d) (:predicates (p)))");
    CHECK_THROWS_AS(
        parse_problem("(define (problem e) (:domain d) (:goal (and (q))))", d),
        SemanticError);
    CHECK_THROWS_AS(
        parse_problem("(define (problem e) (:domain d) (:objects x - nosuch) "
                      "(:goal (and (p))))", d),
        SemanticError);
}

TEST_CASE("serialize_domain round-trips the bundled corpus") {
    for (const char* rel : {"domains/serve_water.pddl"}) {
        DomainDescription d = testutil::load_domain(rel);
        DomainDescription again = parse_domain(serialize_domain(d));
        CHECK(again == d);
        CHECK(serialize_domain(again) == serialize_domain(d));
    }
    DomainDescription d = testutil::serve_water_domain();
    ProblemDescription p = testutil::serve_water_problem(d);
    ProblemDescription again = parse_problem(serialize_problem(p), d);
    CHECK(again == p);
}

TEST_CASE("serialize_domain canonical form of the empty domain") {
    DomainDescription d;
    d.name = "d";
    CHECK(serialize_domain(d) == "(define (domain d))\n");
}

TEST_CASE("serialize/parse fixpoint holds on fuzzed domains") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        auto task = testutil::random_task(rng);
        DomainDescription d2 = parse_domain(serialize_domain(task.domain));
        REQUIRE(d2 == task.domain);
        ProblemDescription p2 = parse_problem(serialize_problem(task.problem), d2);
        REQUIRE(p2 == task.problem);
    }
}

TEST_CASE("ground enumerates type-consistent bindings deterministically") {
    DomainDescription d = testutil::serve_water_domain();
    ProblemDescription p = testutil::serve_water_problem(d);
    auto actions = ground(d, p);

    size_t fills = 0;
    for (const auto& a : actions) {
        if (a.schema == "fill") ++fills;
        // No binding may put a non-cup object in fill's container slot.
        if (a.schema == "fill") CHECK(a.binding[1] == "cup");
    }
    // 1 robot x 1 cup x 1 faucet x 2 locations.
    CHECK(fills == 2);

    auto again = ground(d, p);
    CHECK(again == actions);
}

TEST_CASE("ground instantiates zero-parameter schemas once") {
    DomainDescription d = parse_domain(
        "(define (domain d) (:predicates (p)) "
        "(:action noop :parameters () :precondition (and) :effect (and (p))))");
    ProblemDescription p =
        parse_problem("(define (problem e) (:domain d) (:goal (and (p))))", d);
    auto actions = ground(d, p);
    REQUIRE(actions.size() == 1);
    CHECK(actions[0].schema == "noop");
    CHECK(actions[0].binding.empty());
}

TEST_CASE("ground respects the capacity bound") {
    DomainDescription d = testutil::serve_water_domain();
    ProblemDescription p = testutil::serve_water_problem(d);
    CHECK_THROWS_AS(ground(d, p, 3), CapacityError);
}

TEST_CASE("holds implements closed-world evaluation") {
    WorldState s;
    CHECK(holds(s, Condition{}));

    Condition not_dirty;
    not_dirty.add(Literal{"is_dirty", {"cup"}, true});
    CHECK(holds(s, not_dirty));
    s.atoms.insert(Atom{"is_dirty", {"cup"}});
    CHECK_FALSE(holds(s, not_dirty));

    Condition non_ground;
    non_ground.add(Literal{"is_dirty", {"?c"}, false});
    CHECK_THROWS_AS(holds(s, non_ground), NonGroundError);
}

TEST_CASE("holds rejects the fill precondition without a running faucet") {
    DomainDescription d = testutil::serve_water_domain();
    ProblemDescription p = testutil::serve_water_problem(d);
    GroundAction fill = instantiate(*d.find_action("fill"),
                                    {"robot", "cup", "faucet", "kitchen"});
    WorldState s = state_from_init(p);
    s.atoms.insert(Atom{"is_grasped", {"cup"}});
    s.atoms.insert(Atom{"is_found", {"cup"}});
    CHECK_FALSE(holds(s, fill.precondition)); // (is_on faucet) missing
    s.atoms.insert(Atom{"is_on", {"faucet"}});
    CHECK(holds(s, fill.precondition));
}

TEST_CASE("apply performs delete-then-add effects") {
    DomainDescription d = testutil::serve_water_domain();
    ProblemDescription p = testutil::serve_water_problem(d);
    GroundAction fill = instantiate(*d.find_action("fill"),
                                    {"robot", "cup", "faucet", "kitchen"});
    WorldState s = state_from_init(p);
    s.atoms.insert(Atom{"is_grasped", {"cup"}});
    s.atoms.insert(Atom{"is_on", {"faucet"}});
    s.atoms.erase(Atom{"is_off", {"faucet"}});

    WorldState next = apply(s, fill);
    CHECK(next.holds_atom(Atom{"is_filled", {"cup"}}));
    CHECK(next.holds_atom(Atom{"is_off", {"faucet"}}));
    CHECK_FALSE(next.holds_atom(Atom{"is_on", {"faucet"}}));
}

TEST_CASE("apply with an empty effect returns an identical state") {
    ActionSchema idle;
    idle.name = "idle";
    GroundAction ga = instantiate(idle, {});
    WorldState s;
    s.atoms.insert(Atom{"p", {"a"}});
    CHECK(apply(s, ga) == s);
}

TEST_CASE("apply names the first failing precondition literal") {
    ActionSchema a;
    a.name = "probe";
    a.precondition.add(Literal{"is_dirty", {"cup"}, true});
    GroundAction ga = instantiate(a, {});
    WorldState s;
    s.atoms.insert(Atom{"is_dirty", {"cup"}});
    try {
        apply(s, ga);
        FAIL("expected PreconditionViolation");
    } catch (const PreconditionViolation& e) {
        CHECK(std::string(e.what()).find("(not (is_dirty cup))") != std::string::npos);
    }
}

TEST_CASE("apply effect identity on random states") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto task = testutil::random_task(rng, 4);
        auto actions = ground(task.domain, task.problem);
        WorldState s = state_from_init(task.problem);
        for (const auto& ga : actions) {
            if (!holds(s, ga.precondition)) continue;
            WorldState next = apply(s, ga);
            // atoms(next) == (atoms(s) \ dels) + adds
            WorldState expect = s;
            for (const auto& lit : ga.effect.conjuncts)
                if (lit.negated) expect.atoms.erase(atom_of(lit));
            for (const auto& lit : ga.effect.conjuncts)
                if (!lit.negated) expect.atoms.insert(atom_of(lit));
            REQUIRE(next == expect);
        }
    }
}
