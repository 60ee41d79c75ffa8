#pragma once

#include <string>
#include <vector>

#include "cowp/pddl.hpp"

namespace cowp {

namespace detail {

inline void print_typed_list(std::string& out,
                             const std::vector<std::pair<std::string, std::string>>& list,
                             const std::string& indent) {
    for (const auto& [name, type] : list)
        out += indent + name + " - " + type + "\n";
}

inline std::string inline_typed_list(
    const std::vector<std::pair<std::string, std::string>>& list) {
    std::string out;
    for (size_t i = 0; i < list.size(); ++i) {
        if (i) out += " ";
        out += list[i].first + " - " + list[i].second;
    }
    return out;
}

inline void print_condition(std::string& out, const Condition& c,
                            const std::string& indent) {
    if (c.empty()) {
        out += "(and)";
        return;
    }
    out += "(and\n";
    for (size_t i = 0; i < c.conjuncts.size(); ++i) {
        out += indent + "    " + c.conjuncts[i].to_string();
        out += (i + 1 == c.conjuncts.size()) ? ")" : "\n";
    }
}

} // namespace detail

/// Canonical text form: 4-space indent, one literal per line inside (and ...).
/// parse_domain(serialize_domain(d)) is structurally equal to d.
inline std::string serialize_domain(const DomainDescription& d) {
    const bool empty = d.requirements.empty() && d.types.entries.empty() &&
                       d.predicates.empty() && d.actions.empty();
    if (empty) return "(define (domain " + d.name + "))\n";

    std::string out = "(define (domain " + d.name + ")\n";
    if (!d.requirements.empty()) {
        out += "    (:requirements";
        for (const auto& r : d.requirements) out += " " + r;
        out += ")\n";
    }
    if (!d.types.entries.empty()) {
        out += "    (:types\n";
        detail::print_typed_list(out, d.types.entries, "        ");
        out += "    )\n";
    }
    if (!d.predicates.empty()) {
        out += "    (:predicates\n";
        for (const auto& p : d.predicates) {
            out += "        (" + p.name;
            if (!p.params.empty()) out += " " + detail::inline_typed_list(p.params);
            out += ")\n";
        }
        out += "    )\n";
    }
    for (const auto& a : d.actions) {
        out += "    (:action " + a.name + "\n";
        out += "        :parameters (" + detail::inline_typed_list(a.params) + ")\n";
        out += "        :precondition ";
        detail::print_condition(out, a.precondition, "        ");
        out += "\n        :effect ";
        detail::print_condition(out, a.effect, "        ");
        out += ")\n";
    }
    out += ")\n";
    return out;
}

inline std::string serialize_problem(const ProblemDescription& p) {
    std::string out = "(define (problem " + p.name + ")\n";
    if (!p.domain_name.empty())
        out += "    (:domain " + p.domain_name + ")\n";
    if (!p.objects.empty()) {
        out += "    (:objects\n";
        detail::print_typed_list(out, p.objects, "        ");
        out += "    )\n";
    }
    if (!p.init.empty()) {
        out += "    (:init\n";
        for (const auto& lit : p.init) out += "        " + lit.to_string() + "\n";
        out += "    )\n";
    }
    out += "    (:goal ";
    detail::print_condition(out, p.goal, "    ");
    out += ")\n)\n";
    return out;
}

/// Plan listing in step form: "S1: find robot cup kitchen".
inline std::string format_plan(const std::vector<GroundAction>& steps) {
    std::string out;
    for (size_t i = 0; i < steps.size(); ++i)
        out += "S" + std::to_string(i + 1) + ": " + steps[i].to_string() + "\n";
    return out;
}

} // namespace cowp
