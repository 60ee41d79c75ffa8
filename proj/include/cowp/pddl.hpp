#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cowp/errors.hpp"
#include "cowp/strutil.hpp"

namespace cowp {

inline bool is_variable(const std::string& term) {
    return !term.empty() && term[0] == '?';
}

/// A (possibly negated) predicate application. Args are variables
/// ("?c") or object constants ("cup").
struct Literal {
    std::string predicate;
    std::vector<std::string> args;
    bool negated = false;

    bool ground() const {
        for (const auto& a : args)
            if (is_variable(a)) return false;
        return true;
    }

    Literal negation() const { return Literal{predicate, args, !negated}; }

    auto operator<=>(const Literal&) const = default;

    std::string to_string() const {
        std::string inner = "(" + predicate;
        for (const auto& a : args) inner += " " + a;
        inner += ")";
        return negated ? "(not " + inner + ")" : inner;
    }
};

/// Conjunction of literals. Insertion-ordered, duplicates rejected.
struct Condition {
    std::vector<Literal> conjuncts;

    bool contains(const Literal& lit) const {
        for (const auto& c : conjuncts)
            if (c == lit) return true;
        return false;
    }

    /// Returns false (and leaves the condition unchanged) on duplicates.
    bool add(const Literal& lit) {
        if (contains(lit)) return false;
        conjuncts.push_back(lit);
        return true;
    }

    bool ground() const {
        for (const auto& c : conjuncts)
            if (!c.ground()) return false;
        return true;
    }

    bool empty() const { return conjuncts.empty(); }

    auto operator<=>(const Condition&) const = default;
};

struct PredicateSchema {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params; // (variable, type)

    size_t arity() const { return params.size(); }

    auto operator<=>(const PredicateSchema&) const = default;
};

struct ActionSchema {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params; // (variable, type)
    Condition precondition;
    Condition effect;

    /// Precondition conjuncts added at runtime rather than authored in the
    /// source file. Clones of this schema omit the ones tied to the retyped
    /// role; not part of structural identity.
    std::vector<Literal> augmented;

    std::optional<std::string> param_type(const std::string& var) const {
        for (const auto& [v, t] : params)
            if (v == var) return t;
        return std::nullopt;
    }

    /// Base name with any "__class" clone suffix stripped.
    std::string base_name() const {
        auto pos = name.find("__");
        return pos == std::string::npos ? name : name.substr(0, pos);
    }

    bool operator==(const ActionSchema& o) const {
        return name == o.name && params == o.params &&
               precondition == o.precondition && effect == o.effect;
    }
};

/// Type hierarchy: a forest rooted at "object" ("object" itself is implicit).
struct TypeHierarchy {
    std::vector<std::pair<std::string, std::string>> entries; // (type, parent)

    bool declared(const std::string& type) const {
        if (type == "object") return true;
        for (const auto& [t, _] : entries)
            if (t == type) return true;
        return false;
    }

    std::optional<std::string> parent(const std::string& type) const {
        for (const auto& [t, p] : entries)
            if (t == type) return p;
        return std::nullopt;
    }

    bool is_subtype(const std::string& type, const std::string& ancestor) const {
        if (ancestor == "object") return declared(type);
        std::string cur = type;
        for (size_t guard = 0; guard <= entries.size(); ++guard) {
            if (cur == ancestor) return true;
            auto p = parent(cur);
            if (!p) return false;
            cur = *p;
        }
        return false;
    }

    /// Adds type (under "object") if not yet declared. Returns true if added.
    bool ensure(const std::string& type) {
        if (declared(type)) return false;
        entries.emplace_back(type, "object");
        return true;
    }

    auto operator<=>(const TypeHierarchy&) const = default;
};

struct DomainDescription {
    std::string name;
    std::vector<std::string> requirements;
    TypeHierarchy types;
    std::vector<PredicateSchema> predicates;
    std::vector<ActionSchema> actions;

    const ActionSchema* find_action(const std::string& action_name) const {
        for (const auto& a : actions)
            if (a.name == action_name) return &a;
        return nullptr;
    }

    ActionSchema* find_action(const std::string& action_name) {
        for (auto& a : actions)
            if (a.name == action_name) return &a;
        return nullptr;
    }

    const PredicateSchema* find_predicate(const std::string& pred_name) const {
        for (const auto& p : predicates)
            if (p.name == pred_name) return &p;
        return nullptr;
    }

    bool operator==(const DomainDescription& o) const {
        return name == o.name && requirements == o.requirements &&
               types == o.types && predicates == o.predicates &&
               actions == o.actions;
    }
};

struct ProblemDescription {
    std::string name;
    std::string domain_name;
    std::vector<std::pair<std::string, std::string>> objects; // (constant, type)
    std::vector<Literal> init; // positive ground atoms, insertion-ordered
    Condition goal;

    /// Init facts asserted at runtime (situation symbols, introduced
    /// objects). Not part of structural identity.
    std::vector<Literal> augmented_init;

    std::optional<std::string> object_type(const std::string& constant) const {
        for (const auto& [c, t] : objects)
            if (c == constant) return t;
        return std::nullopt;
    }

    bool has_init(const Literal& atom) const {
        for (const auto& a : init)
            if (a == atom) return true;
        return false;
    }

    bool operator==(const ProblemDescription& o) const {
        return name == o.name && domain_name == o.domain_name &&
               objects == o.objects && init == o.init && goal == o.goal;
    }
};

/// Ground positive atom.
struct Atom {
    std::string predicate;
    std::vector<std::string> args;

    auto operator<=>(const Atom&) const = default;

    std::string to_string() const {
        std::string s = "(" + predicate;
        for (const auto& a : args) s += " " + a;
        return s + ")";
    }
};

inline Atom atom_of(const Literal& lit) { return Atom{lit.predicate, lit.args}; }

/// Closed-world state: absent atoms are false.
struct WorldState {
    std::set<Atom> atoms;

    bool holds_atom(const Atom& a) const { return atoms.count(a) > 0; }

    auto operator<=>(const WorldState&) const = default;
};

struct GroundAction {
    std::string schema;  // full schema name, possibly a clone ("fill__bowl")
    std::vector<std::string> binding;
    Condition precondition; // ground
    Condition effect;       // ground

    /// Name used in plan listings: the clone suffix is an internal detail.
    std::string display_name() const {
        auto pos = schema.find("__");
        return pos == std::string::npos ? schema : schema.substr(0, pos);
    }

    std::string to_string() const {
        std::string s = display_name();
        for (const auto& b : binding) s += " " + b;
        return s;
    }

    auto operator<=>(const GroundAction&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void check_literal_decl(const DomainDescription& d, const Literal& lit,
                               const std::string& where) {
    const auto* p = d.find_predicate(lit.predicate);
    if (!p)
        throw SemanticError("undeclared predicate '" + lit.predicate + "' in " + where);
    if (p->arity() != lit.args.size())
        throw SemanticError("arity mismatch for '" + lit.predicate + "' in " + where +
                            ": expected " + std::to_string(p->arity()) + ", got " +
                            std::to_string(lit.args.size()));
}

inline void check_vars_bound(const ActionSchema& a, const Condition& c,
                             const std::string& which) {
    for (const auto& lit : c.conjuncts) {
        for (const auto& arg : lit.args) {
            if (is_variable(arg) && !a.param_type(arg))
                throw SemanticError("unbound variable '" + arg + "' in " + which +
                                    " of action '" + a.name + "'");
        }
    }
}

} // namespace detail

inline void validate_domain(const DomainDescription& d) {
    if (d.name.empty()) throw SemanticError("domain has no name");

    // Type forest: parents declared, no cycles.
    std::set<std::string> seen_types;
    for (const auto& [t, p] : d.types.entries) {
        if (!seen_types.insert(t).second)
            throw SemanticError("type '" + t + "' declared twice");
        if (t == "object") throw SemanticError("'object' may not be redeclared");
    }
    for (const auto& [t, p] : d.types.entries) {
        if (!d.types.declared(p))
            throw SemanticError("type '" + t + "' has undeclared parent '" + p + "'");
        if (!d.types.is_subtype(t, "object"))
            throw SemanticError("type cycle involving '" + t + "'");
    }

    std::set<std::string> pred_names;
    for (const auto& p : d.predicates) {
        if (!pred_names.insert(p.name).second)
            throw SemanticError("predicate '" + p.name + "' declared twice");
        std::set<std::string> vars;
        for (const auto& [v, t] : p.params) {
            if (!is_variable(v))
                throw SemanticError("predicate '" + p.name + "' parameter '" + v +
                                    "' is not a variable");
            if (!vars.insert(v).second)
                throw SemanticError("duplicate parameter '" + v + "' in predicate '" +
                                    p.name + "'");
            if (!d.types.declared(t))
                throw SemanticError("predicate '" + p.name + "' uses undeclared type '" +
                                    t + "'");
        }
    }

    std::set<std::string> action_names;
    for (const auto& a : d.actions) {
        if (!action_names.insert(a.name).second)
            throw SemanticError("action '" + a.name + "' declared twice");
        std::set<std::string> vars;
        for (const auto& [v, t] : a.params) {
            if (!is_variable(v))
                throw SemanticError("action '" + a.name + "' parameter '" + v +
                                    "' is not a variable");
            if (!vars.insert(v).second)
                throw SemanticError("duplicate parameter '" + v + "' in action '" +
                                    a.name + "'");
            if (!d.types.declared(t))
                throw SemanticError("action '" + a.name + "' uses undeclared type '" + t +
                                    "'");
        }
        detail::check_vars_bound(a, a.precondition, "precondition");
        detail::check_vars_bound(a, a.effect, "effect");
        for (const auto& lit : a.precondition.conjuncts)
            detail::check_literal_decl(d, lit, "action '" + a.name + "'");
        for (const auto& lit : a.effect.conjuncts) {
            detail::check_literal_decl(d, lit, "action '" + a.name + "'");
            if (a.effect.contains(lit.negation()))
                throw SemanticError("action '" + a.name + "' adds and deletes " +
                                    atom_of(lit).to_string());
        }
    }
}

inline void validate_problem(const ProblemDescription& p, const DomainDescription& d) {
    if (p.name.empty()) throw SemanticError("problem has no name");
    if (!p.domain_name.empty() && p.domain_name != d.name)
        throw SemanticError("problem is for domain '" + p.domain_name +
                            "', not '" + d.name + "'");
    std::set<std::string> names;
    for (const auto& [c, t] : p.objects) {
        if (!names.insert(c).second)
            throw SemanticError("object '" + c + "' declared twice");
        if (!d.types.declared(t))
            throw SemanticError("object '" + c + "' has undeclared type '" + t + "'");
    }
    for (const auto& lit : p.init) {
        if (lit.negated)
            throw SemanticError("negated init literal " + lit.to_string());
        if (!lit.ground())
            throw SemanticError("non-ground init literal " + lit.to_string());
        detail::check_literal_decl(d, lit, "init");
    }
    for (const auto& lit : p.goal.conjuncts) {
        if (!lit.ground())
            throw SemanticError("non-ground goal literal " + lit.to_string());
        detail::check_literal_decl(d, lit, "goal");
    }
}

// ---------------------------------------------------------------------------
// Semantics

/// True iff every positive conjunct is in the state and every negative
/// conjunct is absent (closed-world reading).
inline bool holds(const WorldState& s, const Condition& c) {
    if (!c.ground())
        throw NonGroundError("holds() requires a ground condition");
    for (const auto& lit : c.conjuncts) {
        bool present = s.holds_atom(atom_of(lit));
        if (lit.negated == present) return false;
    }
    return true;
}

/// First conjunct not satisfied by the state, if any.
inline std::optional<Literal> first_unsatisfied(const WorldState& s, const Condition& c) {
    if (!c.ground())
        throw NonGroundError("first_unsatisfied() requires a ground condition");
    for (const auto& lit : c.conjuncts) {
        bool present = s.holds_atom(atom_of(lit));
        if (lit.negated == present) return lit;
    }
    return std::nullopt;
}

/// STRIPS transition: delete effects first, then add effects.
inline WorldState apply(const WorldState& s, const GroundAction& a) {
    if (auto missing = first_unsatisfied(s, a.precondition))
        throw PreconditionViolation("action '" + a.to_string() +
                                    "' precondition fails at " + missing->to_string());
    WorldState next = s;
    for (const auto& lit : a.effect.conjuncts)
        if (lit.negated) next.atoms.erase(atom_of(lit));
    for (const auto& lit : a.effect.conjuncts)
        if (!lit.negated) next.atoms.insert(atom_of(lit));
    return next;
}

inline WorldState state_from_init(const ProblemDescription& p) {
    WorldState s;
    for (const auto& lit : p.init) s.atoms.insert(atom_of(lit));
    return s;
}

// ---------------------------------------------------------------------------
// Grounding

inline Literal substitute(const Literal& lit,
                          const std::map<std::string, std::string>& binding) {
    Literal out = lit;
    for (auto& arg : out.args) {
        if (is_variable(arg)) {
            auto it = binding.find(arg);
            if (it != binding.end()) arg = it->second;
        }
    }
    return out;
}

inline Condition substitute(const Condition& c,
                            const std::map<std::string, std::string>& binding) {
    Condition out;
    for (const auto& lit : c.conjuncts) out.add(substitute(lit, binding));
    return out;
}

inline GroundAction instantiate(const ActionSchema& schema,
                                const std::vector<std::string>& binding) {
    std::map<std::string, std::string> sub;
    for (size_t i = 0; i < schema.params.size(); ++i)
        sub[schema.params[i].first] = binding[i];
    return GroundAction{schema.name, binding, substitute(schema.precondition, sub),
                        substitute(schema.effect, sub)};
}

constexpr size_t kDefaultGroundCapacity = 1'000'000;

/// Every type-consistent instantiation of every action schema.
/// Deterministic order: schema name, then binding in object-declaration
/// order. Throws CapacityError past `capacity` ground actions.
inline std::vector<GroundAction> ground(const DomainDescription& d,
                                        const ProblemDescription& p,
                                        size_t capacity = kDefaultGroundCapacity) {
    std::vector<const ActionSchema*> schemas;
    for (const auto& a : d.actions) schemas.push_back(&a);
    std::sort(schemas.begin(), schemas.end(),
              [](const ActionSchema* a, const ActionSchema* b) { return a->name < b->name; });

    std::vector<GroundAction> out;
    for (const auto* schema : schemas) {
        // Candidate objects per parameter, in declaration order.
        std::vector<std::vector<std::string>> candidates(schema->params.size());
        bool feasible = true;
        for (size_t i = 0; i < schema->params.size(); ++i) {
            for (const auto& [obj, type] : p.objects)
                if (d.types.is_subtype(type, schema->params[i].second))
                    candidates[i].push_back(obj);
            if (candidates[i].empty()) {
                feasible = false;
                break;
            }
        }
        if (!feasible && !schema->params.empty()) continue;

        std::vector<size_t> odometer(schema->params.size(), 0);
        while (true) {
            std::vector<std::string> binding(schema->params.size());
            for (size_t i = 0; i < odometer.size(); ++i)
                binding[i] = candidates[i][odometer[i]];
            out.push_back(instantiate(*schema, binding));
            if (out.size() > capacity)
                throw CapacityError("ground action set exceeds capacity of " +
                                    std::to_string(capacity));
            // Advance: rightmost position fastest.
            size_t k = odometer.size();
            while (k > 0) {
                --k;
                if (++odometer[k] < candidates[k].size()) break;
                odometer[k] = 0;
                if (k == 0) goto next_schema;
            }
            if (odometer.empty()) break;
        }
    next_schema:;
    }
    return out;
}

} // namespace cowp
