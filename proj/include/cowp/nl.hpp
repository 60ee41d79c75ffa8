#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cowp/errors.hpp"
#include "cowp/pddl.hpp"
#include "cowp/strutil.hpp"

namespace cowp {

/// Sentence patterns keyed by action base name. "{i}" substitutes the i-th
/// bound object (0-based parameter index) in phrase form.
///
///     fill :: fill a {1} with water
class NlPatternTable {
public:
    static NlPatternTable from_text(std::string_view text) {
        NlPatternTable table;
        for (const auto& raw : str::split(text, '\n')) {
            std::string line = str::trim(raw);
            if (line.empty() || line[0] == '#') continue;
            auto sep = line.find("::");
            if (sep == std::string::npos)
                throw FormatError("pattern line lacks '::': " + line);
            std::string action = str::lower(str::trim(line.substr(0, sep)));
            std::string pattern = str::trim(line.substr(sep + 2));
            table.patterns_[action] = pattern;
        }
        return table;
    }

    void set(const std::string& action, const std::string& pattern) {
        patterns_[action] = pattern;
    }

    bool has(const std::string& action_base) const {
        return patterns_.count(action_base) > 0;
    }

    /// "fill robot cup faucet kitchen" -> "fill a cup with water"
    std::string render(const GroundAction& a) const {
        return render_with(a, a.binding.size(), "");
    }

    /// Same, but parameter `role` reads as `replacement` (an object class).
    std::string render_with(const GroundAction& a, size_t role,
                            const std::string& replacement) const {
        auto it = patterns_.find(a.display_name());
        if (it == patterns_.end())
            throw MissingPattern("no sentence pattern for action '" + a.display_name() +
                                 "'");
        std::string out;
        const std::string& pattern = it->second;
        for (size_t i = 0; i < pattern.size();) {
            if (pattern[i] == '{') {
                auto close = pattern.find('}', i);
                if (close == std::string::npos)
                    throw FormatError("unbalanced '{' in pattern for '" +
                                      a.display_name() + "'");
                size_t index = std::stoul(pattern.substr(i + 1, close - i - 1));
                if (index >= a.binding.size())
                    throw FormatError("pattern for '" + a.display_name() +
                                      "' references parameter " + std::to_string(index));
                out += str::to_phrase(index == role ? replacement : a.binding[index]);
                i = close + 1;
            } else {
                out += pattern[i++];
            }
        }
        return out;
    }

    /// Whether the pattern voices parameter `role` at all (a class swap in a
    /// silent role would render an unchanged sentence).
    bool mentions_role(const std::string& action_base, size_t role) const {
        auto it = patterns_.find(action_base);
        if (it == patterns_.end()) return false;
        return it->second.find("{" + std::to_string(role) + "}") != std::string::npos;
    }

private:
    std::map<std::string, std::string> patterns_;
};

/// "Cup is broken." -> "the cup is broken" (ready for ", if ..." splicing).
inline std::string situation_clause(std::string_view situation) {
    std::string s = str::trim(situation);
    while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
    s = str::trim(s);
    if (s.empty()) return s;
    s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    for (const char* prefix : {"the ", "a ", "an ", "there "})
        if (str::starts_with(s, prefix)) return s;
    return "the " + s;
}

/// Known object nouns (multi-word phrases allowed).
struct NounLexicon {
    std::vector<std::string> nouns; // phrase form, e.g. "measuring cup"

    void add(std::string_view phrase) {
        std::string p = str::lower(str::trim(phrase));
        if (p.empty()) return;
        for (const auto& n : nouns)
            if (n == p) return;
        nouns.push_back(p);
    }

    void add_identifier(std::string_view ident) { add(str::to_phrase(ident)); }

    /// Leftmost (then longest) known noun phrase in the text, as identifier.
    std::optional<std::string> subject_of(std::string_view text) const {
        auto tokens = str::words(text);
        for (size_t pos = 0; pos < tokens.size(); ++pos) {
            std::optional<std::string> best;
            size_t best_len = 0;
            for (const auto& noun : nouns) {
                auto ntok = str::words(noun);
                if (ntok.empty() || pos + ntok.size() > tokens.size()) continue;
                if (!std::equal(ntok.begin(), ntok.end(), tokens.begin() + pos)) continue;
                if (ntok.size() > best_len) {
                    best_len = ntok.size();
                    best = noun;
                }
            }
            if (best) return str::to_identifier(*best);
        }
        return std::nullopt;
    }
};

/// Phrase -> predicate-name rows, checked in file order before the generic
/// "X is Y"/"X has Y" fallbacks.
struct SituationLexicon {
    std::vector<std::pair<std::string, std::string>> rows;
    NounLexicon nouns;

    /// Lines:  lex <phrase> :: <predicate>   |   noun <phrase>
    static SituationLexicon from_text(std::string_view text) {
        SituationLexicon lex;
        for (const auto& raw : str::split(text, '\n')) {
            std::string line = str::trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (str::starts_with(line, "noun ")) {
                lex.nouns.add(line.substr(5));
                continue;
            }
            if (str::starts_with(line, "lex ")) {
                auto sep = line.find("::");
                if (sep == std::string::npos)
                    throw FormatError("lexicon line lacks '::': " + line);
                lex.rows.emplace_back(str::lower(str::trim(line.substr(4, sep - 4))),
                                      str::lower(str::trim(line.substr(sep + 2))));
                continue;
            }
            throw FormatError("unknown lexicon directive: " + line);
        }
        return lex;
    }
};

struct SymbolizedSituation {
    Literal literal;      // positive ground atom over the subject
    bool fresh_predicate; // not yet declared in the domain
    std::string subject;  // identifier form
};

/// Symbolizes "Cup is dirty" as (is_dirty cup). Subjects come from the
/// domain's types plus the supplied noun lexicon; the predicate comes from the
/// lexicon rows or an is_/has_ pattern over the remaining words.
inline SymbolizedSituation situation_to_predicate(std::string_view situation,
                                                  const DomainDescription& domain,
                                                  const SituationLexicon& lexicon,
                                                  const NounLexicon& extra_nouns = {}) {
    if (str::trim(situation).empty())
        throw EmptyField("situation text is empty");

    NounLexicon nouns = lexicon.nouns;
    for (const auto& [type, parent] : domain.types.entries) nouns.add_identifier(type);
    for (const auto& n : extra_nouns.nouns) nouns.add(n);

    auto subject = nouns.subject_of(situation);
    if (!subject)
        throw UnmappableSituation("no known object mentioned in: " +
                                  std::string(situation));

    std::string predicate;
    for (const auto& [phrase, pred] : lexicon.rows) {
        if (str::phrase_in(phrase, situation)) {
            predicate = pred;
            break;
        }
    }
    if (predicate.empty()) {
        auto tokens = str::words(situation);
        for (size_t i = 0; i + 1 < tokens.size(); ++i) {
            if (tokens[i] == "is") {
                predicate =
                    "is_" + str::join({tokens.begin() + static_cast<long>(i) + 1,
                                       tokens.end()},
                                      "_");
                break;
            }
            if (tokens[i] == "has") {
                predicate =
                    "has_" + str::join({tokens.begin() + static_cast<long>(i) + 1,
                                        tokens.end()},
                                       "_");
                break;
            }
        }
    }
    if (predicate.empty())
        predicate = "is_" + str::words(situation).back();

    SymbolizedSituation out;
    out.literal = Literal{predicate, {*subject}, false};
    out.fresh_predicate = domain.find_predicate(predicate) == nullptr;
    out.subject = *subject;
    return out;
}

} // namespace cowp
