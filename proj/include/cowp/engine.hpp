#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cowp/acquirer.hpp"
#include "cowp/monitor.hpp"
#include "cowp/nl.hpp"
#include "cowp/oracle.hpp"
#include "cowp/pddl_printer.hpp"
#include "cowp/planner.hpp"
#include "cowp/sim.hpp"
#include "cowp/surgery.hpp"

namespace cowp {

struct EngineConfig {
    std::string task_nl = "the task"; // voiced in selection prompts
    size_t acquisition_cap = 3;
    size_t node_budget = 1'000'000;
    size_t ground_capacity = 1'000'000;
    size_t watchdog = 0; // 0: derived from plan length and caps
    bool adjust_related = true;

    /// Optional oracle-backed predicate generator (the few-shot route);
    /// the situation lexicon remains the fallback.
    std::function<std::optional<Literal>(const std::string& situation)>
        oracle_symbolizer;
};

struct PlanEvent {
    std::string label; // initial | after-precondition | after-extension | no-solution
    bool found = false;
    Plan plan;
};

struct EpisodeResult {
    enum class Outcome { Completed, NoSolution, Failed };
    Outcome outcome = Outcome::Failed;
    std::string failure_reason;

    std::vector<GroundAction> executed;
    std::optional<Situation> situation;
    size_t situations_encountered = 0;
    size_t situations_handled = 0;
    bool infeasible_seen = false;

    std::vector<PlanEvent> lineage;
    std::vector<AffordanceFact> acquired;
    SurgeryLog surgery;
    std::vector<OracleExchange> exchanges;

    DomainDescription final_domain;
    ProblemDescription final_problem;
    size_t planner_calls = 0;

    bool completed() const { return outcome == Outcome::Completed; }

    static const char* outcome_name(Outcome o) {
        switch (o) {
            case Outcome::Completed: return "completed";
            case Outcome::NoSolution: return "no-solution";
            case Outcome::Failed: return "failed";
        }
        return "?";
    }
};

namespace detail {

/// Precondition literal for the blocked action: the situation subject turns
/// into the matching parameter variable when bound, and stays a constant
/// otherwise.
inline Literal blocking_literal(const GroundAction& blocked, const ActionSchema& schema,
                                const SymbolizedSituation& sym) {
    Literal lit = sym.literal.negation();
    for (size_t i = 0; i < blocked.binding.size(); ++i) {
        if (blocked.binding[i] == sym.subject) {
            for (auto& arg : lit.args)
                if (arg == sym.subject) arg = schema.params[i].first;
            break;
        }
    }
    return lit;
}

} // namespace detail

/// One episode of the open-world loop: plan, check each next action against
/// the active situation, execute while feasible; on an infeasibility verdict
/// constrain the blocked action and replan; if planning dies, grow the action
/// knowledge from the environment's objects and replan again; report
/// no-solution when nothing helps.
inline EpisodeResult run_episode(const DomainDescription& pristine_domain,
                                 const ProblemDescription& pristine_problem,
                                 SimEnv& env, OracleBackend& oracle,
                                 const SituationLexicon& lexicon,
                                 const NlPatternTable& patterns,
                                 const EngineConfig& cfg = {}) {
    EpisodeResult R;
    ExchangeLog log;
    DomainDescription dom = pristine_domain;
    ProblemDescription prob = pristine_problem;
    WorldState world = state_from_init(pristine_problem);

    std::string active_situation;
    std::optional<SymbolizedSituation> symbolized;
    bool symbolize_failed = false;
    std::set<std::pair<std::string, std::string>> surgeries_done;
    size_t acquisition_rounds = 0;

    NounLexicon env_nouns;
    for (const auto& [name, cls] : env.objects) env_nouns.add_identifier(name);
    for (const auto& [name, type] : pristine_problem.objects) env_nouns.add_identifier(name);

    auto finish = [&](EpisodeResult::Outcome outcome, const std::string& reason = "") {
        R.outcome = outcome;
        R.failure_reason = reason;
        R.exchanges = log.snapshot();
        R.final_domain = dom;
        R.final_problem = prob;
        if (R.situations_encountered > 0 && R.infeasible_seen &&
            outcome == EpisodeResult::Outcome::Completed)
            R.situations_handled = 1;
        return R;
    };

    PlannerLimits limits{cfg.node_budget, cfg.ground_capacity};
    auto replan = [&]() {
        ProblemDescription cur = prob;
        cur.init.clear();
        cur.augmented_init.clear();
        for (const auto& a : world.atoms)
            cur.init.push_back(Literal{a.predicate, a.args, false});
        ++R.planner_calls;
        return plan(dom, cur, limits);
    };

    auto symbolize = [&]() {
        if (symbolized || symbolize_failed) return;
        if (cfg.oracle_symbolizer) {
            try {
                if (auto lit = cfg.oracle_symbolizer(active_situation)) {
                    SymbolizedSituation sym;
                    sym.literal = *lit;
                    sym.subject = lit->args.empty() ? "" : lit->args[0];
                    sym.fresh_predicate = dom.find_predicate(lit->predicate) == nullptr;
                    symbolized = sym;
                    return;
                }
            } catch (const Error&) {
                // fall through to the lexicon route
            }
        }
        try {
            symbolized = situation_to_predicate(active_situation, dom, lexicon, env_nouns);
        } catch (const UnmappableSituation&) {
            symbolize_failed = true;
        }
    };

    // Introduce a class instance with the same initial profile as the object
    // it substitutes for, reading from the pristine problem.
    auto profile_facts = [&](const std::string& origin, const std::string& instance,
                             const std::string& object_class) {
        std::vector<Literal> facts;
        for (const auto& lit : pristine_problem.init) {
            bool mentions = false;
            for (const auto& arg : lit.args) mentions |= (arg == origin);
            if (!mentions) continue;
            Literal fact = lit;
            for (auto& arg : fact.args)
                if (arg == origin) arg = instance;
            facts.push_back(std::move(fact));
        }
        return facts;
    };

    PlannerOutcome initial = replan();
    if (initial.kind == PlannerOutcome::Kind::ResourceExhausted)
        return finish(EpisodeResult::Outcome::Failed, "planner budget exhausted");
    if (initial.kind == PlannerOutcome::Kind::NoSolution) {
        R.lineage.push_back({"initial", false, {}});
        return finish(EpisodeResult::Outcome::NoSolution);
    }
    Plan pln = initial.plan;
    R.lineage.push_back({"initial", true, pln});
    size_t idx = 0;

    // One Feasible verdict covers every later suffix of the same plan under
    // the same situation; re-deriving it would only repeat identical prompts.
    bool feasibility_cached = false;

    const size_t watchdog = cfg.watchdog > 0
                                ? cfg.watchdog
                                : 8 * (pln.size() + 4) * (cfg.acquisition_cap + 2) + 64;
    for (size_t guard = 0;; ++guard) {
        if (guard > watchdog)
            return finish(EpisodeResult::Outcome::Failed, "step watchdog tripped");
        if (holds(world, prob.goal)) return finish(EpisodeResult::Outcome::Completed);
        if (idx >= pln.size())
            return finish(EpisodeResult::Outcome::Failed,
                          "plan exhausted without reaching the goal");

        if (auto injected = env.maybe_inject(R.executed.size())) {
            active_situation = injected->text;
            R.situation = injected;
            ++R.situations_encountered;
            feasibility_cached = false;
        }

        FeasibilityVerdict verdict = FeasibilityVerdict::ok(0);
        if (!active_situation.empty() && !feasibility_cached)
            verdict = monitor_plan(pln, active_situation, oracle, log, patterns, idx);

        if (verdict.feasible) {
            feasibility_cached = !active_situation.empty();
            const GroundAction& act = pln.steps[idx];
            if (!env.execution_ok(patterns.render(act), active_situation))
                return finish(EpisodeResult::Outcome::Failed,
                              "execution fault: '" + act.to_string() +
                                  "' unacceptable given the situation");
            if (auto missing = first_unsatisfied(world, act.precondition))
                return finish(EpisodeResult::Outcome::Failed,
                              "runtime precondition failure at '" + act.to_string() +
                                  "': " + missing->to_string());
            world = apply(world, act);
            R.executed.push_back(act);
            ++idx;
            continue;
        }

        // Infeasible: constrain the blocked action from the situation symbol.
        R.infeasible_seen = true;
        const GroundAction blocked = verdict.action;
        symbolize();

        bool constrained = false;
        if (symbolized) {
            const ActionSchema* schema = dom.find_action(blocked.schema);
            Literal lit = detail::blocking_literal(blocked, *schema, *symbolized);
            auto key = std::make_pair(blocked.schema, lit.to_string());
            if (!surgeries_done.count(key)) {
                surgeries_done.insert(key);
                AddPreconditionOptions opts;
                opts.declare_missing_predicate = true;
                opts.provenance = verdict.exchange_id;
                auto res = add_precondition(dom, blocked.schema, lit, opts, &R.surgery);
                dom = res.domain;
                constrained = !res.warning;

                AssertInitOptions init_opts;
                init_opts.provenance = verdict.exchange_id;
                if (dom.types.declared(symbolized->subject))
                    init_opts.object_types[symbolized->subject] = symbolized->subject;
                auto asserted =
                    assert_init_fact(prob, symbolized->literal, dom, init_opts, &R.surgery);
                prob = asserted.problem;
                world.atoms.insert(atom_of(symbolized->literal));
            }
        }

        PlannerOutcome next;
        next.kind = PlannerOutcome::Kind::NoSolution;
        if (constrained) next = replan();
        if (next.kind == PlannerOutcome::Kind::ResourceExhausted)
            return finish(EpisodeResult::Outcome::Failed, "planner budget exhausted");
        if (next.found()) {
            pln = next.plan;
            idx = 0;
            feasibility_cached = false;
            R.lineage.push_back({"after-precondition", true, pln});
            continue;
        }
        R.lineage.push_back({"no-solution", false, {}});

        // Substitution targets the role where the situation's subject sits,
        // when the sentence voices it; the primary object role otherwise.
        size_t acquire_role = kAutoRole;
        if (symbolized) {
            for (size_t i = 0; i < blocked.binding.size(); ++i) {
                if (blocked.binding[i] == symbolized->subject &&
                    patterns.mentions_role(blocked.display_name(), i)) {
                    acquire_role = i;
                    break;
                }
            }
        }

        // The related-action sweep follows both the role's declared type and
        // the blocked object's own class chain.
        auto related_offers = [&](const DomainDescription& dd, const AffordanceFact& fact) {
            std::vector<std::string> extra;
            if (fact.role < blocked.binding.size()) {
                std::string t =
                    prob.object_type(blocked.binding[fact.role]).value_or("");
                while (!t.empty() && t != "object") {
                    extra.push_back(t);
                    t = dd.types.parent(t).value_or("");
                }
            }
            return related_extension_offers(dd, fact, extra);
        };

        // Knowledge acquisition rounds (capped).
        bool repaired = false;
        while (acquisition_rounds < cfg.acquisition_cap && !env.objects.empty()) {
            ++acquisition_rounds;
            auto facts = acquire_affordances(blocked, env.objects, dom, patterns, oracle,
                                             log, acquire_role);
            if (facts.empty()) break;

            std::vector<PlanCandidate> candidates;
            for (const auto& fact : facts) {
                // Isolated view: only this class extended, for its own plan.
                DomainDescription dom_k = dom;
                {
                    ExtendActionOptions opts;
                    opts.auto_declare_type = true;
                    if (cfg.adjust_related)
                        for (const auto& offer : related_offers(dom_k, fact))
                            dom_k = extend_action_to_class(dom_k, offer, opts).domain;
                    dom_k = extend_action_to_class(dom_k, fact, opts).domain;
                }
                WorldState world_k = world;
                ProblemDescription prob_k = prob;
                const std::string origin = blocked.binding[fact.role];
                for (const auto& [name, cls] : env.objects) {
                    if (cls != fact.object_class) continue;
                    AssertInitOptions opts;
                    opts.object_types[name] = fact.object_class;
                    for (const auto& f : profile_facts(origin, name, cls)) {
                        auto res = assert_init_fact(prob_k, f, dom_k, opts);
                        prob_k = res.problem;
                        world_k.atoms.insert(atom_of(f));
                    }
                }
                ProblemDescription query = prob_k;
                query.init.clear();
                query.augmented_init.clear();
                for (const auto& a : world_k.atoms)
                    query.init.push_back(Literal{a.predicate, a.args, false});
                ++R.planner_calls;
                PlannerOutcome got = plan(dom_k, query, limits);
                if (got.found())
                    candidates.push_back(PlanCandidate{fact.object_class, got.plan});
            }

            // Adopt every granted affordance; knowledge stays for later repairs.
            for (const auto& fact : facts) {
                ExtendActionOptions opts;
                opts.auto_declare_type = true;
                if (cfg.adjust_related)
                    for (const auto& offer : related_offers(dom, fact))
                        dom = extend_action_to_class(dom, offer, opts, &R.surgery).domain;
                dom = extend_action_to_class(dom, fact, opts, &R.surgery).domain;
                R.acquired.push_back(fact);
                const std::string origin = blocked.binding[fact.role];
                for (const auto& [name, cls] : env.objects) {
                    if (cls != fact.object_class) continue;
                    AssertInitOptions opts2;
                    opts2.provenance = fact.provenance;
                    opts2.object_types[name] = fact.object_class;
                    for (const auto& f : profile_facts(origin, name, cls)) {
                        auto res = assert_init_fact(prob, f, dom, opts2, &R.surgery);
                        prob = res.problem;
                        world.atoms.insert(atom_of(f));
                    }
                }
            }

            if (candidates.empty()) continue;
            SelectionResult chosen =
                select_best(candidates, cfg.task_nl, situation_clause(active_situation),
                            oracle, log);
            pln = chosen.chosen.plan;
            idx = 0;
            feasibility_cached = false;
            R.lineage.push_back({"after-extension", true, pln});
            repaired = true;
            break;
        }
        if (!repaired) return finish(EpisodeResult::Outcome::NoSolution);
    }
}

// ---------------------------------------------------------------------------
// JSON views

inline nlohmann::json to_json(const Verdict& v) {
    return v.to_string();
}

inline nlohmann::json to_json(const OracleExchange& ex) {
    return nlohmann::json{{"id", ex.id},
                          {"kind", prompt_kind_name(ex.kind)},
                          {"prompt", ex.prompt},
                          {"completion", ex.completion},
                          {"verdict", ex.verdict.to_string()},
                          {"backend", ex.backend},
                          {"latency_ms", ex.latency_ms}};
}

inline nlohmann::json to_json(const Mutation& m) {
    nlohmann::json j{{"kind", Mutation::kind_name(m.kind)},
                     {"provenance", m.provenance}};
    switch (m.kind) {
        case Mutation::Kind::PreconditionAdded:
            j["action"] = m.action;
            j["literal"] = m.literal.to_string();
            j["declared_predicate"] = m.declared_predicate;
            break;
        case Mutation::Kind::ActionExtended:
            j["action"] = m.fact.action;
            j["class"] = m.fact.object_class;
            j["role"] = m.fact.role;
            j["declared_type"] = m.declared_type;
            break;
        case Mutation::Kind::InitFactAsserted:
            j["fact"] = m.literal.to_string();
            j["declared_objects"] = m.declared_objects;
            break;
    }
    j["diff"] = m.diff;
    return j;
}

inline nlohmann::json to_json(const EpisodeResult& r, bool include_volatile = true) {
    nlohmann::json j;
    j["outcome"] = EpisodeResult::outcome_name(r.outcome);
    j["failure_reason"] = r.failure_reason;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& a : r.executed) steps.push_back(a.to_string());
    j["executed"] = steps;
    j["situation"] = r.situation ? nlohmann::json(r.situation->text) : nlohmann::json();
    j["situations_encountered"] = r.situations_encountered;
    j["situations_handled"] = r.situations_handled;
    j["infeasible_seen"] = r.infeasible_seen;
    nlohmann::json lineage = nlohmann::json::array();
    for (const auto& ev : r.lineage) {
        nlohmann::json plan_steps = nlohmann::json::array();
        for (const auto& s : ev.plan.steps) plan_steps.push_back(s.to_string());
        lineage.push_back(
            {{"label", ev.label}, {"found", ev.found}, {"plan", plan_steps}});
    }
    j["lineage"] = lineage;
    nlohmann::json acquired = nlohmann::json::array();
    for (const auto& f : r.acquired)
        acquired.push_back({{"class", f.object_class},
                            {"action", f.action},
                            {"role", f.role},
                            {"provenance", f.provenance}});
    j["acquired"] = acquired;
    nlohmann::json mutations = nlohmann::json::array();
    for (const auto& m : r.surgery.entries) mutations.push_back(to_json(m));
    j["surgery"] = mutations;
    nlohmann::json exchanges = nlohmann::json::array();
    for (const auto& ex : r.exchanges) {
        nlohmann::json e = to_json(ex);
        if (!include_volatile) {
            e.erase("latency_ms");
            e.erase("backend");
        }
        exchanges.push_back(e);
    }
    j["exchanges"] = exchanges;
    j["planner_calls"] = r.planner_calls;
    j["final_domain"] = serialize_domain(r.final_domain);
    j["final_problem"] = serialize_problem(r.final_problem);
    return j;
}

/// Canonical form for reproducibility comparisons: timing and backend naming
/// excluded.
inline std::string episode_fingerprint(const EpisodeResult& r) {
    return to_json(r, /*include_volatile=*/false).dump();
}

} // namespace cowp
