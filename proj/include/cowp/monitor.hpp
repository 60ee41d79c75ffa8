#pragma once

#include <optional>
#include <string>

#include "cowp/nl.hpp"
#include "cowp/oracle.hpp"
#include "cowp/planner.hpp"

namespace cowp {

struct FeasibilityVerdict {
    bool feasible = true;
    size_t step_index = 0;       // absolute plan index of the first No
    GroundAction action;         // the offending step
    std::string exchange_id;     // the exchange that produced the No
    size_t queries = 0;

    static FeasibilityVerdict ok(size_t queries) {
        FeasibilityVerdict v;
        v.feasible = true;
        v.queries = queries;
        return v;
    }
};

/// Checks every not-yet-executed step against the situation, one prompt per
/// action, stopping at the first No. An unparseable answer counts as No: a
/// dubious action is replanned around, not executed. No situation, no
/// queries.
inline FeasibilityVerdict monitor_plan(const Plan& plan, const std::string& situation,
                                       OracleBackend& backend, ExchangeLog& log,
                                       const NlPatternTable& patterns,
                                       size_t start_index = 0) {
    if (start_index > plan.size())
        throw Error("monitor start index " + std::to_string(start_index) +
                    " past plan length " + std::to_string(plan.size()));
    if (str::trim(situation).empty()) return FeasibilityVerdict::ok(0);

    const std::string clause = situation_clause(situation);
    size_t queries = 0;
    for (size_t i = start_index; i < plan.size(); ++i) {
        const GroundAction& step = plan.steps[i];
        std::string prompt = render_feasibility_prompt(patterns.render(step), clause);
        OracleExchange ex = query(backend, log, prompt, PromptKind::Feasibility);
        ++queries;
        if (!ex.verdict.yes()) {
            FeasibilityVerdict v;
            v.feasible = false;
            v.step_index = i;
            v.action = step;
            v.exchange_id = ex.id;
            v.queries = queries;
            return v;
        }
    }
    return FeasibilityVerdict::ok(queries);
}

} // namespace cowp
