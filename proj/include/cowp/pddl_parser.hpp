#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cowp/errors.hpp"
#include "cowp/pddl.hpp"
#include "cowp/strutil.hpp"

namespace cowp {

namespace sexpr {

struct Node {
    // Leaf iff children untouched and !atom.empty(); "(" groups otherwise.
    std::string atom;
    std::vector<Node> children;
    bool is_atom = false;
    int line = 0;
    int column = 0;

    const Node& at(size_t i, const std::string& what) const {
        if (i >= children.size())
            throw SyntaxError("expected " + what, line, column);
        return children[i];
    }
};

struct Lexer {
    std::string_view src;
    size_t pos = 0;
    int line = 1;
    int column = 1;

    void advance() {
        if (src[pos] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
        ++pos;
    }

    void skip_ws() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == ';') {
                while (pos < src.size() && src[pos] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos >= src.size();
    }
};

inline Node parse_node(Lexer& lx) {
    lx.skip_ws();
    if (lx.pos >= lx.src.size())
        throw SyntaxError("unexpected end of input", lx.line, lx.column);

    Node node;
    node.line = lx.line;
    node.column = lx.column;
    char c = lx.src[lx.pos];
    if (c == '(') {
        lx.advance();
        while (true) {
            lx.skip_ws();
            if (lx.pos >= lx.src.size())
                throw SyntaxError("unclosed '('", node.line, node.column);
            if (lx.src[lx.pos] == ')') {
                lx.advance();
                return node;
            }
            node.children.push_back(parse_node(lx));
        }
    }
    if (c == ')')
        throw SyntaxError("unmatched ')'", lx.line, lx.column);

    std::string text;
    while (lx.pos < lx.src.size()) {
        char ch = lx.src[lx.pos];
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' || ch == ')' ||
            ch == ';')
            break;
        text += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        lx.advance();
    }
    node.atom = text;
    node.is_atom = true;
    return node;
}

/// Parses exactly one s-expression; trailing non-whitespace is an error.
inline Node parse_single(std::string_view text) {
    Lexer lx{text};
    Node root = parse_node(lx);
    if (!lx.eof())
        throw SyntaxError("trailing content after top-level form", lx.line, lx.column);
    return root;
}

} // namespace sexpr

namespace detail {

inline const std::string& atom_text(const sexpr::Node& n, const std::string& what) {
    if (!n.is_atom)
        throw SyntaxError("expected " + what + ", found a list", n.line, n.column);
    return n.atom;
}

/// "a b - t c - u d" style typed lists; untyped trailing names get "object".
inline std::vector<std::pair<std::string, std::string>>
parse_typed_list(const sexpr::Node& list) {
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::string> pending;
    for (size_t i = 0; i < list.children.size(); ++i) {
        const std::string& tok = atom_text(list.children[i], "name in typed list");
        if (tok == "-") {
            if (pending.empty())
                throw SyntaxError("'-' without names before it", list.children[i].line,
                                  list.children[i].column);
            if (i + 1 >= list.children.size())
                throw SyntaxError("'-' without a type after it", list.children[i].line,
                                  list.children[i].column);
            const std::string& type = atom_text(list.children[i + 1], "type name");
            for (const auto& name : pending) out.emplace_back(name, type);
            pending.clear();
            ++i;
        } else {
            pending.push_back(tok);
        }
    }
    for (const auto& name : pending) out.emplace_back(name, "object");
    return out;
}

static const char* kUnsupportedHeads[] = {"or",     "imply",  "exists", "forall",
                                          "when",   "=",      ">",      "<",
                                          ">=",     "<=",     "increase", "decrease",
                                          "assign", "scale-up", "scale-down"};

inline Literal parse_literal(const sexpr::Node& n) {
    if (n.is_atom)
        throw SyntaxError("expected a literal", n.line, n.column);
    if (n.children.empty())
        throw SyntaxError("empty literal", n.line, n.column);
    const std::string& head = atom_text(n.children[0], "predicate name");
    if (head == "not") {
        if (n.children.size() != 2)
            throw SyntaxError("'not' takes exactly one atom", n.line, n.column);
        Literal inner = parse_literal(n.children[1]);
        if (inner.negated)
            throw SemanticError("nested negation is not supported");
        inner.negated = true;
        return inner;
    }
    for (const char* bad : kUnsupportedHeads)
        if (head == bad)
            throw SemanticError("unsupported construct '(" + head +
                                " ...)': only STRIPS with typing and negative "
                                "preconditions is accepted");
    Literal lit;
    lit.predicate = head;
    for (size_t i = 1; i < n.children.size(); ++i)
        lit.args.push_back(atom_text(n.children[i], "term"));
    return lit;
}

/// (and lit...) | lit | () — conjunctive goal descriptions only.
inline Condition parse_condition(const sexpr::Node& n) {
    Condition cond;
    if (n.is_atom)
        throw SyntaxError("expected a condition", n.line, n.column);
    if (n.children.empty()) return cond; // () is vacuously true
    if (n.children[0].is_atom && n.children[0].atom == "and") {
        for (size_t i = 1; i < n.children.size(); ++i) {
            if (!cond.add(parse_literal(n.children[i])))
                throw SemanticError("duplicate conjunct " +
                                    parse_literal(n.children[i]).to_string());
        }
        return cond;
    }
    cond.add(parse_literal(n));
    return cond;
}

inline ActionSchema parse_action(const sexpr::Node& n) {
    ActionSchema action;
    action.name = atom_text(n.at(1, "action name"), "action name");
    size_t i = 2;
    while (i < n.children.size()) {
        const std::string& key = atom_text(n.children[i], "action section keyword");
        const sexpr::Node& value = n.at(i + 1, "value for " + key);
        if (key == ":parameters") {
            action.params = parse_typed_list(value);
        } else if (key == ":precondition") {
            action.precondition = parse_condition(value);
        } else if (key == ":effect") {
            action.effect = parse_condition(value);
        } else {
            throw SemanticError("unsupported action section '" + key + "'");
        }
        i += 2;
    }
    return action;
}

inline const std::set<std::string>& supported_requirements() {
    static const std::set<std::string> reqs = {":strips", ":typing",
                                               ":negative-preconditions"};
    return reqs;
}

} // namespace detail

/// Parses and validates a PDDL domain (STRIPS + typing + negative
/// preconditions subset).
inline DomainDescription parse_domain(std::string_view text) {
    sexpr::Node root = sexpr::parse_single(text);
    if (root.is_atom || root.children.empty() ||
        detail::atom_text(root.at(0, "define"), "define") != "define")
        throw SyntaxError("expected (define (domain ...) ...)", root.line, root.column);

    const sexpr::Node& header = root.at(1, "(domain NAME)");
    if (header.is_atom || header.children.size() != 2 ||
        detail::atom_text(header.at(0, "domain keyword"), "domain keyword") != "domain")
        throw SyntaxError("expected (domain NAME)", header.line, header.column);

    DomainDescription d;
    d.name = detail::atom_text(header.at(1, "domain name"), "domain name");

    for (size_t i = 2; i < root.children.size(); ++i) {
        const sexpr::Node& section = root.children[i];
        if (section.is_atom || section.children.empty())
            throw SyntaxError("expected a (:section ...)", section.line, section.column);
        const std::string& head = detail::atom_text(section.at(0, "section"), "section");
        if (head == ":requirements") {
            for (size_t j = 1; j < section.children.size(); ++j) {
                const std::string& req =
                    detail::atom_text(section.children[j], "requirement");
                if (!detail::supported_requirements().count(req))
                    throw SemanticError("unsupported requirement '" + req + "'");
                d.requirements.push_back(req);
            }
        } else if (head == ":types") {
            sexpr::Node body = section;
            body.children.erase(body.children.begin());
            d.types.entries = detail::parse_typed_list(body);
        } else if (head == ":predicates") {
            for (size_t j = 1; j < section.children.size(); ++j) {
                const sexpr::Node& pn = section.children[j];
                if (pn.is_atom || pn.children.empty())
                    throw SyntaxError("expected (name ?v - type ...)", pn.line, pn.column);
                PredicateSchema ps;
                ps.name = detail::atom_text(pn.children[0], "predicate name");
                sexpr::Node body = pn;
                body.children.erase(body.children.begin());
                ps.params = detail::parse_typed_list(body);
                d.predicates.push_back(ps);
            }
        } else if (head == ":action") {
            d.actions.push_back(detail::parse_action(section));
        } else {
            throw SemanticError("unsupported domain section '" + head + "'");
        }
    }
    validate_domain(d);
    return d;
}

/// Parses and validates a PDDL problem against its domain.
inline ProblemDescription parse_problem(std::string_view text,
                                        const DomainDescription& domain) {
    sexpr::Node root = sexpr::parse_single(text);
    if (root.is_atom || root.children.empty() ||
        detail::atom_text(root.at(0, "define"), "define") != "define")
        throw SyntaxError("expected (define (problem ...) ...)", root.line, root.column);

    const sexpr::Node& header = root.at(1, "(problem NAME)");
    if (header.is_atom || header.children.size() != 2 ||
        detail::atom_text(header.at(0, "problem keyword"), "problem keyword") != "problem")
        throw SyntaxError("expected (problem NAME)", header.line, header.column);

    ProblemDescription p;
    p.name = detail::atom_text(header.at(1, "problem name"), "problem name");

    for (size_t i = 2; i < root.children.size(); ++i) {
        const sexpr::Node& section = root.children[i];
        if (section.is_atom || section.children.empty())
            throw SyntaxError("expected a (:section ...)", section.line, section.column);
        const std::string& head = detail::atom_text(section.at(0, "section"), "section");
        if (head == ":domain") {
            p.domain_name = detail::atom_text(section.at(1, "domain name"), "domain name");
        } else if (head == ":objects") {
            sexpr::Node body = section;
            body.children.erase(body.children.begin());
            p.objects = detail::parse_typed_list(body);
        } else if (head == ":init") {
            for (size_t j = 1; j < section.children.size(); ++j) {
                Literal lit = detail::parse_literal(section.children[j]);
                if (!p.has_init(lit)) p.init.push_back(lit);
            }
        } else if (head == ":goal") {
            p.goal = detail::parse_condition(section.at(1, "goal condition"));
        } else {
            throw SemanticError("unsupported problem section '" + head + "'");
        }
    }
    validate_problem(p, domain);
    return p;
}

} // namespace cowp
