#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cowp/diff.hpp"
#include "cowp/errors.hpp"
#include "cowp/pddl.hpp"
#include "cowp/pddl_printer.hpp"

namespace cowp {

/// Commonsense grant: `object_class` may fill parameter `role` of `action`.
struct AffordanceFact {
    std::string object_class;
    std::string action;
    size_t role = 0;
    std::string provenance; // oracle exchange id

    auto operator<=>(const AffordanceFact&) const = default;
};

struct Mutation {
    enum class Kind { PreconditionAdded, ActionExtended, InitFactAsserted };
    Kind kind;
    std::string action;               // PreconditionAdded / ActionExtended
    Literal literal;                  // PreconditionAdded / InitFactAsserted
    AffordanceFact fact;              // ActionExtended
    bool declared_predicate = false;  // PreconditionAdded
    bool declared_type = false;       // ActionExtended
    std::vector<std::pair<std::string, std::string>> declared_objects; // InitFact
    std::string provenance;
    std::string diff; // serialized before -> after

    static const char* kind_name(Kind k) {
        switch (k) {
            case Kind::PreconditionAdded: return "precondition-added";
            case Kind::ActionExtended: return "action-extended";
            case Kind::InitFactAsserted: return "init-fact-asserted";
        }
        return "?";
    }
};

/// Append-only record of applied mutations. Replaying it on the pristine
/// domain/problem pair reproduces the mutated pair.
struct SurgeryLog {
    std::vector<Mutation> entries;
};

struct DomainSurgeryResult {
    DomainDescription domain;
    bool warning = false;
    std::string warning_text;
};

struct ProblemSurgeryResult {
    ProblemDescription problem;
    bool warning = false;
    std::string warning_text;
    std::vector<std::pair<std::string, std::string>> declared_objects;
};

struct AddPreconditionOptions {
    bool declare_missing_predicate = false;
    std::string provenance;
};

/// Adds `lit` to the named action's precondition (copy-on-write). An
/// already-present conjunct is an idempotent no-op flagged with a warning.
inline DomainSurgeryResult add_precondition(const DomainDescription& d,
                                            const std::string& action_name,
                                            const Literal& lit,
                                            const AddPreconditionOptions& opts = {},
                                            SurgeryLog* log = nullptr) {
    const ActionSchema* target = d.find_action(action_name);
    if (!target) throw UnknownAction("no action named '" + action_name + "'");
    for (const auto& arg : lit.args) {
        if (is_variable(arg) && !target->param_type(arg))
            throw UnboundVariable("literal " + lit.to_string() + " uses '" + arg +
                                  "', not a parameter of '" + action_name + "'");
    }

    DomainSurgeryResult result;
    if (target->precondition.contains(lit)) {
        result.domain = d;
        result.warning = true;
        result.warning_text = "duplicate conjunct " + lit.to_string() + " on '" +
                              action_name + "'";
        return result;
    }

    result.domain = d;
    bool declared = false;
    if (!result.domain.find_predicate(lit.predicate)) {
        if (!opts.declare_missing_predicate)
            throw SemanticError("literal " + lit.to_string() +
                                " references undeclared predicate");
        PredicateSchema ps;
        ps.name = lit.predicate;
        for (size_t i = 0; i < lit.args.size(); ++i)
            ps.params.emplace_back("?x" + std::to_string(i), "object");
        result.domain.predicates.push_back(ps);
        declared = true;
    }
    ActionSchema* action = result.domain.find_action(action_name);
    action->precondition.add(lit);
    action->augmented.push_back(lit);

    if (log) {
        Mutation m;
        m.kind = Mutation::Kind::PreconditionAdded;
        m.action = action_name;
        m.literal = lit;
        m.declared_predicate = declared;
        m.provenance = opts.provenance;
        m.diff = unified_diff(serialize_domain(d), serialize_domain(result.domain));
        log->entries.push_back(std::move(m));
    }
    return result;
}

struct ExtendActionOptions {
    bool auto_declare_type = false;
};

/// Deterministic clone name for an extension.
inline std::string clone_name(const std::string& action, const std::string& object_class) {
    return action + "__" + object_class;
}

namespace detail {

inline std::string fresh_role_variable(const ActionSchema& schema, size_t role,
                                       const std::string& object_class) {
    auto taken = [&](const std::string& v) {
        for (size_t i = 0; i < schema.params.size(); ++i)
            if (i != role && schema.params[i].first == v) return true;
        return false;
    };
    std::string initial = "?" + object_class.substr(0, 1);
    if (!taken(initial)) return initial;
    std::string full = "?" + object_class;
    if (!taken(full)) return full;
    for (int i = 0;; ++i) {
        std::string v = full + std::to_string(i);
        if (!taken(v)) return v;
    }
}

inline Condition rename_var(const Condition& c, const std::string& from,
                            const std::string& to) {
    Condition out;
    for (Literal lit : c.conjuncts) {
        for (auto& arg : lit.args)
            if (arg == from) arg = to;
        out.add(lit);
    }
    return out;
}

inline bool mentions(const Literal& lit, const std::string& var) {
    for (const auto& arg : lit.args)
        if (arg == var) return true;
    return false;
}

} // namespace detail

/// Lets `fact.object_class` play the given parameter role of `fact.action` by
/// adding a cloned schema with that role retyped. Runtime-added precondition
/// conjuncts tied to the retyped variable do not carry over to the clone; the
/// queried class is a fresh object with no recorded defects.
inline DomainSurgeryResult extend_action_to_class(const DomainDescription& d,
                                                  const AffordanceFact& fact,
                                                  const ExtendActionOptions& opts = {},
                                                  SurgeryLog* log = nullptr) {
    const ActionSchema* base = d.find_action(fact.action);
    if (!base) throw UnknownAction("no action named '" + fact.action + "'");
    if (fact.role >= base->params.size())
        throw SemanticError("role " + std::to_string(fact.role) +
                            " out of range for '" + fact.action + "'");

    DomainSurgeryResult result;
    const std::string& role_type = base->params[fact.role].second;
    if (d.types.declared(fact.object_class) &&
        d.types.is_subtype(fact.object_class, role_type)) {
        result.domain = d;
        result.warning = true;
        result.warning_text = "'" + fact.object_class + "' already fits role " +
                              std::to_string(fact.role) + " of '" + fact.action + "'";
        return result;
    }
    std::string name = clone_name(fact.action, fact.object_class);
    if (d.find_action(name)) {
        result.domain = d;
        result.warning = true;
        result.warning_text = "extension '" + name + "' already present";
        return result;
    }

    result.domain = d;
    bool declared = false;
    if (!result.domain.types.declared(fact.object_class)) {
        if (!opts.auto_declare_type)
            throw UnknownType("unknown object class '" + fact.object_class + "'");
        result.domain.types.ensure(fact.object_class);
        declared = true;
    }

    ActionSchema clone = *base;
    clone.name = name;
    const std::string old_var = base->params[fact.role].first;
    const std::string new_var =
        detail::fresh_role_variable(*base, fact.role, fact.object_class);

    // Strip runtime conjuncts that talk about the retyped role.
    Condition pre;
    std::vector<Literal> kept_augmented;
    for (const auto& lit : clone.precondition.conjuncts) {
        bool runtime_added = false;
        for (const auto& aug : clone.augmented)
            if (aug == lit) runtime_added = true;
        if (runtime_added && detail::mentions(lit, old_var)) continue;
        pre.add(lit);
        if (runtime_added) kept_augmented.push_back(lit);
    }
    clone.precondition = detail::rename_var(pre, old_var, new_var);
    clone.effect = detail::rename_var(clone.effect, old_var, new_var);
    clone.augmented.clear();
    for (Literal lit : kept_augmented) {
        for (auto& arg : lit.args)
            if (arg == old_var) arg = new_var;
        clone.augmented.push_back(lit);
    }
    clone.params[fact.role] = {new_var, fact.object_class};
    result.domain.actions.push_back(clone);
    validate_domain(result.domain);

    if (log) {
        Mutation m;
        m.kind = Mutation::Kind::ActionExtended;
        m.action = fact.action;
        m.fact = fact;
        m.declared_type = declared;
        m.provenance = fact.provenance;
        m.diff = unified_diff(serialize_domain(d), serialize_domain(result.domain));
        log->entries.push_back(std::move(m));
    }
    return result;
}

/// Actions other than `fact.action` whose parameter list also carries the
/// generalized role's type (or one of the caller's additional types, e.g. the
/// blocked object's own class and its ancestors). Offered to the caller;
/// nothing is mutated here.
inline std::vector<AffordanceFact> related_extension_offers(
    const DomainDescription& d, const AffordanceFact& fact,
    const std::vector<std::string>& extra_types = {}) {
    std::vector<AffordanceFact> offers;
    const ActionSchema* base = d.find_action(fact.action);
    if (!base || fact.role >= base->params.size()) return offers;
    std::vector<std::string> types{base->params[fact.role].second};
    for (const auto& t : extra_types)
        if (std::find(types.begin(), types.end(), t) == types.end()) types.push_back(t);
    for (const auto& a : d.actions) {
        if (a.name == fact.action) continue;
        if (a.name.find("__") != std::string::npos) continue; // clones stay leaves
        for (size_t i = 0; i < a.params.size(); ++i) {
            if (std::find(types.begin(), types.end(), a.params[i].second) == types.end())
                continue;
            if (d.find_action(clone_name(a.name, fact.object_class))) break;
            offers.push_back(AffordanceFact{fact.object_class, a.name, i, fact.provenance});
            break;
        }
    }
    return offers;
}

struct AssertInitOptions {
    /// Types for constants not yet declared; predicate parameter types are
    /// the fallback.
    std::map<std::string, std::string> object_types;
    std::string provenance;
};

/// Adds a ground positive atom to the problem's init. Unknown constants of a
/// resolvable type are declared on the fly and recorded.
inline ProblemSurgeryResult assert_init_fact(const ProblemDescription& p,
                                             const Literal& atom,
                                             const DomainDescription& d,
                                             const AssertInitOptions& opts = {},
                                             SurgeryLog* log = nullptr) {
    if (atom.negated || !atom.ground())
        throw SemanticError("init fact must be a positive ground atom: " +
                            atom.to_string());
    const PredicateSchema* ps = d.find_predicate(atom.predicate);
    if (!ps) throw UnknownPredicate("no predicate named '" + atom.predicate + "'");
    if (ps->arity() != atom.args.size())
        throw ArityMismatch("'" + atom.predicate + "' takes " +
                            std::to_string(ps->arity()) + " arguments, got " +
                            std::to_string(atom.args.size()));

    ProblemSurgeryResult result;
    if (p.has_init(atom)) {
        result.problem = p;
        result.warning = true;
        result.warning_text = "init already contains " + atom.to_string();
        return result;
    }
    result.problem = p;
    for (size_t i = 0; i < atom.args.size(); ++i) {
        const std::string& constant = atom.args[i];
        if (result.problem.object_type(constant)) continue;
        std::string type;
        if (auto it = opts.object_types.find(constant); it != opts.object_types.end())
            type = it->second;
        else
            type = ps->params[i].second;
        if (!d.types.declared(type))
            throw UnknownType("cannot declare '" + constant + "': unknown type '" +
                              type + "'");
        result.problem.objects.emplace_back(constant, type);
        result.declared_objects.emplace_back(constant, type);
    }
    result.problem.init.push_back(atom);
    result.problem.augmented_init.push_back(atom);

    if (log) {
        Mutation m;
        m.kind = Mutation::Kind::InitFactAsserted;
        m.literal = atom;
        m.declared_objects = result.declared_objects;
        m.provenance = opts.provenance;
        m.diff = unified_diff(serialize_problem(p), serialize_problem(result.problem));
        log->entries.push_back(std::move(m));
    }
    return result;
}

/// Replays a log against the pristine pair; the result serializes identically
/// to the pair the log was recorded from.
inline std::pair<DomainDescription, ProblemDescription>
replay_log(const SurgeryLog& log, DomainDescription domain, ProblemDescription problem) {
    for (const auto& m : log.entries) {
        switch (m.kind) {
            case Mutation::Kind::PreconditionAdded: {
                AddPreconditionOptions opts;
                opts.declare_missing_predicate = m.declared_predicate;
                opts.provenance = m.provenance;
                domain = add_precondition(domain, m.action, m.literal, opts).domain;
                break;
            }
            case Mutation::Kind::ActionExtended: {
                ExtendActionOptions opts;
                opts.auto_declare_type = m.declared_type;
                domain = extend_action_to_class(domain, m.fact, opts).domain;
                break;
            }
            case Mutation::Kind::InitFactAsserted: {
                AssertInitOptions opts;
                for (const auto& [obj, type] : m.declared_objects)
                    opts.object_types[obj] = type;
                opts.provenance = m.provenance;
                problem = assert_init_fact(problem, m.literal, domain, opts).problem;
                break;
            }
        }
    }
    return {std::move(domain), std::move(problem)};
}

// ---------------------------------------------------------------------------
// Mutation scripts (surgeon CLI)

/// One mutation per line:
///   add-precondition <action> <literal>     e.g. add-precondition fill (not (is_dirty ?c))
///   extend-action <action> <role-var> <class>
///   assert-init <atom>                      e.g. assert-init (is_dirty cup)
struct ScriptResult {
    DomainDescription domain;
    ProblemDescription problem;
    SurgeryLog log;
    std::vector<std::string> warnings;
};

inline ScriptResult run_mutation_script(std::string_view script,
                                        DomainDescription domain,
                                        ProblemDescription problem);

} // namespace cowp

#include "cowp/pddl_parser.hpp"

namespace cowp {

inline ScriptResult run_mutation_script(std::string_view script,
                                        DomainDescription domain,
                                        ProblemDescription problem) {
    ScriptResult out;
    out.domain = std::move(domain);
    out.problem = std::move(problem);
    int line_no = 0;
    for (const auto& raw : str::split(script, '\n')) {
        ++line_no;
        std::string line = str::trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        auto space = line.find(' ');
        std::string op = str::lower(line.substr(0, space));
        std::string rest = space == std::string::npos ? "" : str::trim(line.substr(space));
        try {
            if (op == "add-precondition") {
                auto sp = rest.find(' ');
                if (sp == std::string::npos)
                    throw SemanticError("expected: add-precondition <action> <literal>");
                std::string action = str::lower(rest.substr(0, sp));
                Literal lit = detail::parse_literal(
                    sexpr::parse_single(str::trim(rest.substr(sp))));
                AddPreconditionOptions opts;
                opts.declare_missing_predicate = true;
                auto res = add_precondition(out.domain, action, lit, opts, &out.log);
                out.domain = res.domain;
                if (res.warning) out.warnings.push_back(res.warning_text);
            } else if (op == "extend-action") {
                auto parts = str::split(rest, ' ');
                std::erase_if(parts, [](const std::string& s) { return s.empty(); });
                if (parts.size() != 3)
                    throw SemanticError("expected: extend-action <action> <role-var> <class>");
                std::string action = str::lower(parts[0]);
                const ActionSchema* schema = out.domain.find_action(action);
                if (!schema) throw UnknownAction("no action named '" + action + "'");
                size_t role = schema->params.size();
                for (size_t i = 0; i < schema->params.size(); ++i)
                    if (schema->params[i].first == str::lower(parts[1])) role = i;
                if (role == schema->params.size())
                    throw UnboundVariable("'" + parts[1] + "' is not a parameter of '" +
                                          action + "'");
                AffordanceFact fact{str::lower(parts[2]), action, role, "script"};
                ExtendActionOptions opts;
                opts.auto_declare_type = true;
                auto res = extend_action_to_class(out.domain, fact, opts, &out.log);
                out.domain = res.domain;
                if (res.warning) out.warnings.push_back(res.warning_text);
            } else if (op == "assert-init") {
                Literal atom = detail::parse_literal(sexpr::parse_single(rest));
                auto res = assert_init_fact(out.problem, atom, out.domain, {}, &out.log);
                out.problem = res.problem;
                if (res.warning) out.warnings.push_back(res.warning_text);
            } else {
                throw SemanticError("unknown mutation '" + op + "'");
            }
        } catch (const Error& e) {
            throw SemanticError("script line " + std::to_string(line_no) + ": " +
                                e.what());
        }
    }
    return out;
}

} // namespace cowp
