#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cowp/pddl.hpp"
#include "cowp/strutil.hpp"

namespace cowp {

struct Plan {
    std::vector<GroundAction> steps;

    bool empty() const { return steps.empty(); }
    size_t size() const { return steps.size(); }

    auto operator<=>(const Plan&) const = default;
};

struct PlannerOutcome {
    enum class Kind { Found, NoSolution, ResourceExhausted };
    Kind kind = Kind::NoSolution;
    Plan plan;
    size_t expanded = 0;

    bool found() const { return kind == Kind::Found; }
};

struct PlannerLimits {
    size_t node_budget = 1'000'000;
    size_t ground_capacity = kDefaultGroundCapacity;
};

namespace detail {

/// Search-time view of the task with atoms interned to dense ids.
struct SearchTask {
    std::vector<Atom> atoms;
    std::map<Atom, int> ids;
    struct Act {
        std::vector<int> pre_pos, pre_neg, adds, dels;
        size_t index; // into the ground action list
    };
    std::vector<Act> acts;
    std::vector<int> goal_pos, goal_neg;

    int intern(const Atom& a) {
        auto [it, inserted] = ids.try_emplace(a, static_cast<int>(atoms.size()));
        if (inserted) atoms.push_back(a);
        return it->second;
    }
};

using StateVec = std::vector<int>; // sorted atom ids

struct StateVecHash {
    size_t operator()(const StateVec& s) const {
        size_t h = 1469598103934665603ULL;
        for (int x : s) {
            h ^= static_cast<size_t>(x) + 0x9e3779b9;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

inline bool state_has(const StateVec& s, int id) {
    return std::binary_search(s.begin(), s.end(), id);
}

inline bool applicable(const SearchTask::Act& a, const StateVec& s) {
    for (int id : a.pre_pos)
        if (!state_has(s, id)) return false;
    for (int id : a.pre_neg)
        if (state_has(s, id)) return false;
    return true;
}

inline StateVec successor(const SearchTask::Act& a, const StateVec& s) {
    StateVec next;
    next.reserve(s.size() + a.adds.size());
    for (int id : s)
        if (!std::binary_search(a.dels.begin(), a.dels.end(), id)) next.push_back(id);
    for (int id : a.adds)
        if (!std::binary_search(next.begin(), next.end(), id)) next.push_back(id);
    std::sort(next.begin(), next.end());
    return next;
}

constexpr int kInf = std::numeric_limits<int>::max() / 4;

/// Additive heuristic over the delete relaxation. Negative conjuncts are
/// ignored; never used to prune, only to order expansion.
inline int h_add(const SearchTask& task, const StateVec& s) {
    std::vector<int> cost(task.atoms.size(), kInf);
    for (int id : s) cost[id] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& act : task.acts) {
            long total = 0;
            for (int id : act.pre_pos) {
                if (cost[id] >= kInf) {
                    total = kInf;
                    break;
                }
                total += cost[id];
            }
            if (total >= kInf) continue;
            int through = static_cast<int>(std::min<long>(total + 1, kInf));
            for (int id : act.adds) {
                if (through < cost[id]) {
                    cost[id] = through;
                    changed = true;
                }
            }
        }
    }
    long h = 0;
    for (int id : task.goal_pos) {
        if (cost[id] >= kInf) return kInf;
        h += cost[id];
    }
    return static_cast<int>(std::min<long>(h, kInf));
}

} // namespace detail

/// Satisficing forward search: greedy best-first on h_add with insertion-order
/// tie-breaking (which degenerates to uniform-cost expansion wherever the
/// heuristic is flat). NoSolution is exhaustive: the reachable state space was
/// fully closed. An external-planner adapter would slot in behind this
/// signature; none is bundled.
inline PlannerOutcome plan(const DomainDescription& d, const ProblemDescription& p,
                           const PlannerLimits& limits = {}) {
    std::vector<GroundAction> grounded = ground(d, p, limits.ground_capacity);

    // Static pruning: an atom no surviving action adds or deletes is fixed by
    // the init; actions whose preconditions contradict a fixed atom are dead.
    {
        WorldState init_state = state_from_init(p);
        bool changed = true;
        while (changed) {
            changed = false;
            std::set<Atom> mutated;
            for (const auto& ga : grounded)
                for (const auto& lit : ga.effect.conjuncts) mutated.insert(atom_of(lit));
            auto dead = [&](const GroundAction& ga) {
                for (const auto& lit : ga.precondition.conjuncts) {
                    if (mutated.count(atom_of(lit))) continue;
                    bool present = init_state.holds_atom(atom_of(lit));
                    if (lit.negated == present) return true;
                }
                return false;
            };
            size_t before = grounded.size();
            std::erase_if(grounded, dead);
            changed = grounded.size() != before;
        }
    }

    detail::SearchTask task;
    detail::StateVec init;
    {
        WorldState s0 = state_from_init(p);
        for (const auto& a : s0.atoms) init.push_back(task.intern(a));
        std::sort(init.begin(), init.end());
    }
    for (size_t i = 0; i < grounded.size(); ++i) {
        detail::SearchTask::Act act;
        act.index = i;
        for (const auto& lit : grounded[i].precondition.conjuncts)
            (lit.negated ? act.pre_neg : act.pre_pos).push_back(task.intern(atom_of(lit)));
        for (const auto& lit : grounded[i].effect.conjuncts)
            (lit.negated ? act.dels : act.adds).push_back(task.intern(atom_of(lit)));
        std::sort(act.pre_pos.begin(), act.pre_pos.end());
        std::sort(act.pre_neg.begin(), act.pre_neg.end());
        std::sort(act.adds.begin(), act.adds.end());
        std::sort(act.dels.begin(), act.dels.end());
        task.acts.push_back(std::move(act));
    }
    for (const auto& lit : p.goal.conjuncts)
        (lit.negated ? task.goal_neg : task.goal_pos).push_back(task.intern(atom_of(lit)));
    std::sort(task.goal_pos.begin(), task.goal_pos.end());
    std::sort(task.goal_neg.begin(), task.goal_neg.end());

    auto is_goal = [&](const detail::StateVec& s) {
        for (int id : task.goal_pos)
            if (!detail::state_has(s, id)) return false;
        for (int id : task.goal_neg)
            if (detail::state_has(s, id)) return false;
        return true;
    };

    struct Node {
        detail::StateVec state;
        int parent;
        int action; // index into grounded, -1 for root
    };
    std::vector<Node> nodes;
    nodes.push_back({init, -1, -1});

    // (h, tick, node) min-heap; tick preserves insertion order among ties.
    using Entry = std::tuple<int, uint64_t, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    uint64_t tick = 0;
    open.emplace(detail::h_add(task, init), tick++, 0);

    std::unordered_set<detail::StateVec, detail::StateVecHash> seen;
    seen.insert(init);

    PlannerOutcome out;
    size_t expanded = 0;
    while (!open.empty()) {
        auto [h, t, idx] = open.top();
        open.pop();
        detail::StateVec state = nodes[idx].state;

        if (is_goal(state)) {
            std::vector<GroundAction> steps;
            for (int cur = idx; nodes[cur].action >= 0; cur = nodes[cur].parent)
                steps.push_back(grounded[nodes[cur].action]);
            std::reverse(steps.begin(), steps.end());

            // Action elimination: drop steps the goal never needed (the
            // heuristic ignores negative preconditions and can detour).
            auto executes = [&](const std::vector<GroundAction>& candidate) {
                WorldState s = state_from_init(p);
                for (const auto& ga : candidate) {
                    if (!holds(s, ga.precondition)) return false;
                    s = apply(s, ga);
                }
                return holds(s, p.goal);
            };
            bool removed = true;
            while (removed) {
                removed = false;
                for (size_t i = 0; i < steps.size(); ++i) {
                    std::vector<GroundAction> candidate = steps;
                    candidate.erase(candidate.begin() + static_cast<long>(i));
                    if (executes(candidate)) {
                        steps = std::move(candidate);
                        removed = true;
                        break;
                    }
                }
            }

            out.kind = PlannerOutcome::Kind::Found;
            out.plan = Plan{std::move(steps)};
            out.expanded = expanded;
            return out;
        }

        if (++expanded > limits.node_budget) {
            out.kind = PlannerOutcome::Kind::ResourceExhausted;
            out.expanded = expanded;
            return out;
        }

        for (size_t ai = 0; ai < task.acts.size(); ++ai) {
            if (!detail::applicable(task.acts[ai], state)) continue;
            detail::StateVec next = detail::successor(task.acts[ai], state);
            if (seen.count(next)) continue;
            seen.insert(next);
            nodes.push_back({next, idx, static_cast<int>(ai)});
            open.emplace(detail::h_add(task, next), tick++,
                         static_cast<int>(nodes.size() - 1));
        }
    }
    out.kind = PlannerOutcome::Kind::NoSolution;
    out.expanded = expanded;
    return out;
}

// ---------------------------------------------------------------------------
// Plan validation

struct ValidationReport {
    bool ok = false;
    std::optional<size_t> failing_step; // 0-based
    std::optional<Literal> failing_literal;
    std::string message;
    WorldState final_state;
};

/// Chained apply from the problem's init; checks the goal at the end.
/// Failure is a result (with diagnostics), never an exception.
inline ValidationReport validate_plan(const DomainDescription& d,
                                      const ProblemDescription& p, const Plan& plan) {
    ValidationReport report;
    WorldState state = state_from_init(p);
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        const GroundAction& step = plan.steps[i];
        if (!d.find_action(step.schema)) {
            report.failing_step = i;
            report.message = "step " + std::to_string(i + 1) + " uses unknown action '" +
                             step.schema + "'";
            return report;
        }
        if (auto missing = first_unsatisfied(state, step.precondition)) {
            report.failing_step = i;
            report.failing_literal = *missing;
            report.message = "step " + std::to_string(i + 1) + " (" + step.to_string() +
                             ") requires " + missing->to_string();
            return report;
        }
        state = apply(state, step);
    }
    if (auto missing = first_unsatisfied(state, p.goal)) {
        report.failing_literal = *missing;
        report.message = "goal requires " + missing->to_string();
        report.final_state = state;
        return report;
    }
    report.ok = true;
    report.final_state = state;
    return report;
}

/// Reads plan text ("S1: find robot cup kitchen" or bare "find robot cup
/// kitchen" lines) back into ground actions of the given domain.
inline Plan parse_plan_text(std::string_view text, const DomainDescription& d) {
    Plan plan;
    for (auto& raw : str::split(text, '\n')) {
        std::string line = str::trim(raw);
        if (line.empty() || line[0] == ';' || line[0] == '#') continue;
        auto colon = line.find(':');
        if (colon != std::string::npos && (line[0] == 'S' || line[0] == 's'))
            line = str::trim(line.substr(colon + 1));
        auto tokens = str::split(line, ' ');
        std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
        if (tokens.empty()) continue;
        std::string name = str::lower(tokens[0]);
        const ActionSchema* schema = d.find_action(name);
        if (!schema)
            throw UnknownAction("plan step uses unknown action '" + name + "'");
        std::vector<std::string> binding;
        for (size_t i = 1; i < tokens.size(); ++i) binding.push_back(str::lower(tokens[i]));
        if (binding.size() != schema->params.size())
            throw SemanticError("plan step '" + line + "' binds " +
                                std::to_string(binding.size()) + " objects, action '" +
                                name + "' takes " +
                                std::to_string(schema->params.size()));
        plan.steps.push_back(instantiate(*schema, binding));
    }
    return plan;
}

} // namespace cowp
