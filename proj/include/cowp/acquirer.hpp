#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cowp/nl.hpp"
#include "cowp/oracle.hpp"
#include "cowp/planner.hpp"
#include "cowp/surgery.hpp"

namespace cowp {

/// The parameter a blocked action's sentence voices first; substitution
/// prompts swap the object in that slot.
inline std::optional<size_t> primary_role(const NlPatternTable& patterns,
                                          const GroundAction& action) {
    for (size_t i = 0; i < action.binding.size(); ++i)
        if (patterns.mentions_role(action.display_name(), i)) return i;
    return std::nullopt;
}

constexpr size_t kAutoRole = static_cast<size_t>(-1);

/// Asks, object class by object class, whether the blocked action works with
/// that class instead (one substitution prompt each). Classes already fitting
/// the role, or already granted a clone, are skipped. Iteration follows the
/// caller's object order; an empty result means nothing in the environment
/// helps.
inline std::vector<AffordanceFact> acquire_affordances(
    const GroundAction& blocked,
    const std::vector<std::pair<std::string, std::string>>& available_objects,
    const DomainDescription& domain, const NlPatternTable& patterns,
    OracleBackend& backend, ExchangeLog& log, size_t role = kAutoRole) {
    if (available_objects.empty())
        throw EmptyField("knowledge acquisition needs available objects");

    const std::string base = blocked.display_name();
    const ActionSchema* schema = domain.find_action(base);
    if (!schema) throw UnknownAction("no action named '" + base + "'");

    if (role == kAutoRole) {
        auto primary = primary_role(patterns, blocked);
        if (!primary)
            return {}; // the sentence voices no object; substitution cannot be asked
        role = *primary;
    }
    if (role >= schema->params.size() || !patterns.mentions_role(base, role))
        return {};
    const std::string& role_type = schema->params[role].second;

    std::vector<AffordanceFact> facts;
    std::set<std::string> seen;
    for (const auto& [name, object_class] : available_objects) {
        if (!seen.insert(object_class).second) continue;
        if (domain.types.declared(object_class) &&
            domain.types.is_subtype(object_class, role_type))
            continue;
        if (domain.find_action(clone_name(base, object_class))) continue;

        std::string sentence =
            patterns.render_with(blocked, role, object_class);
        OracleExchange ex =
            query(backend, log, render_affordance_prompt(sentence), PromptKind::Affordance);
        if (ex.verdict.yes())
            facts.push_back(AffordanceFact{object_class, base, role, ex.id});
    }
    return facts;
}

struct PlanCandidate {
    std::string object_class;
    Plan plan;
};

struct SelectionResult {
    PlanCandidate chosen;
    bool queried = false;
    bool fallback = false; // unparseable answer, first candidate taken
    std::string exchange_id;
};

/// Picks among satisficing candidate plans via one selection prompt. A single
/// candidate returns untouched; an unanswerable completion falls back to the
/// first candidate.
inline SelectionResult select_best(const std::vector<PlanCandidate>& candidates,
                                   const std::string& task_nl,
                                   const std::string& situation_nl,
                                   OracleBackend& backend, ExchangeLog& log) {
    if (candidates.empty()) throw EmptyField("no candidate plans to select from");
    SelectionResult result;
    if (candidates.size() == 1) {
        result.chosen = candidates.front();
        return result;
    }
    std::vector<std::string> options;
    for (const auto& c : candidates) options.push_back(str::to_phrase(c.object_class));
    std::string prompt = render_selection_prompt(options, task_nl, situation_nl);
    OracleExchange ex = query(backend, log, prompt, PromptKind::Selection, options);
    result.queried = true;
    result.exchange_id = ex.id;
    if (ex.verdict.kind == Verdict::Kind::Choice) {
        for (const auto& c : candidates) {
            if (str::to_phrase(c.object_class) == ex.verdict.choice) {
                result.chosen = c;
                return result;
            }
        }
    }
    result.fallback = true;
    result.chosen = candidates.front();
    return result;
}

} // namespace cowp
