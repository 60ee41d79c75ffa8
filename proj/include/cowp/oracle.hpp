#pragma once

#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cowp/errors.hpp"
#include "cowp/nl.hpp"
#include "cowp/strutil.hpp"

namespace cowp {

enum class PromptKind { Feasibility, Affordance, Selection, Symbolize };

inline const char* prompt_kind_name(PromptKind k) {
    switch (k) {
        case PromptKind::Feasibility: return "feasibility";
        case PromptKind::Affordance: return "affordance";
        case PromptKind::Selection: return "selection";
        case PromptKind::Symbolize: return "symbolize";
    }
    return "?";
}

struct Verdict {
    enum class Kind { Yes, No, Choice, Unparseable };
    Kind kind = Kind::Unparseable;
    std::string choice; // Selection only

    bool yes() const { return kind == Kind::Yes; }
    bool no() const { return kind == Kind::No; }

    std::string to_string() const {
        switch (kind) {
            case Kind::Yes: return "yes";
            case Kind::No: return "no";
            case Kind::Choice: return "choice:" + choice;
            case Kind::Unparseable: return "unparseable";
        }
        return "?";
    }

    auto operator<=>(const Verdict&) const = default;
};

// ---------------------------------------------------------------------------
// Prompt templates

inline std::string render_feasibility_prompt(const std::string& action_nl,
                                             const std::string& situation_nl) {
    if (str::trim(action_nl).empty()) throw EmptyField("action description is empty");
    if (str::trim(situation_nl).empty()) throw EmptyField("situation description is empty");
    return "Is it suitable for a robot to " + action_nl + ", if " + situation_nl + "?";
}

inline std::string render_affordance_prompt(const std::string& action_with_object_nl) {
    if (str::trim(action_with_object_nl).empty())
        throw EmptyField("action description is empty");
    return "Is it suitable for a robot to " + action_with_object_nl + "?";
}

inline std::string render_selection_prompt(const std::vector<std::string>& objects,
                                           const std::string& task_nl,
                                           const std::string& situation_nl) {
    if (objects.size() < 2)
        throw TooFewObjects("selection needs at least two objects, got " +
                            std::to_string(objects.size()));
    if (str::trim(task_nl).empty()) throw EmptyField("task description is empty");
    if (str::trim(situation_nl).empty()) throw EmptyField("situation description is empty");
    std::string list;
    for (size_t i = 0; i < objects.size(); ++i) {
        if (i + 1 == objects.size())
            list += "and " + objects[i];
        else
            list += objects[i] + ", ";
    }
    return "There are some objects, such as " + list + ". Which is the most suitable for " +
           task_nl + ", if " + situation_nl + "?";
}

/// Recovers the object list out of a rendered selection prompt.
inline std::vector<std::string> selection_options(const std::string& prompt) {
    auto start = prompt.find("such as ");
    auto stop = prompt.find(". Which");
    if (start == std::string::npos || stop == std::string::npos || stop <= start)
        return {};
    std::string list = prompt.substr(start + 8, stop - start - 8);
    std::vector<std::string> out;
    for (auto& part : str::split(list, ',')) {
        std::string item = str::trim(part);
        if (str::starts_with(item, "and ")) item = str::trim(item.substr(4));
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verdict parsing

/// Leading-token rule: strip punctuation, lowercase; "yes"/"no" decide. For
/// selections, the first listed option that appears anywhere in the
/// completion wins. Everything else is Unparseable (a verdict, not an error).
inline Verdict parse_verdict(const std::string& completion, PromptKind kind,
                             const std::vector<std::string>& options = {}) {
    Verdict v;
    if (kind == PromptKind::Symbolize) return v; // carried raw, parsed elsewhere
    if (kind == PromptKind::Selection) {
        for (const auto& option : options) {
            if (str::phrase_in(option, completion)) {
                v.kind = Verdict::Kind::Choice;
                v.choice = option;
                return v;
            }
        }
        return v;
    }
    auto tokens = str::words(completion);
    if (!tokens.empty()) {
        if (tokens[0] == "yes") v.kind = Verdict::Kind::Yes;
        if (tokens[0] == "no") v.kind = Verdict::Kind::No;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Exchanges

struct OracleExchange {
    std::string id;
    PromptKind kind = PromptKind::Feasibility;
    std::string prompt;
    std::string completion;
    Verdict verdict;
    std::string backend;
    double latency_ms = 0.0;
};

/// Append-only, thread-safe exchange record shared by backends.
class ExchangeLog {
public:
    std::string append(OracleExchange ex) {
        std::lock_guard<std::mutex> lock(mutex_);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "ex-%06zu", entries_.size() + 1);
        ex.id = buf;
        entries_.push_back(std::move(ex));
        return entries_.back().id;
    }

    std::vector<OracleExchange> snapshot() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_;
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_.size();
    }

private:
    mutable std::mutex mutex_;
    std::vector<OracleExchange> entries_;
};

struct OracleConfig {
    std::string endpoint;
    std::string model = "text-davinci-003";
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 32;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    std::string credential_env = "COWP_API_KEY";
    int max_attempts = 3;
    int backoff_initial_ms = 250;
    int backoff_cap_ms = 2000;
    int max_inflight = 4;
};

/// Anything that can answer a rendered prompt with a raw completion.
class OracleBackend {
public:
    virtual ~OracleBackend() = default;
    virtual std::string complete(const std::string& prompt, PromptKind kind) = 0;
    virtual std::string tag() const = 0;
};

/// Sends a prompt, parses the verdict, and records the exchange.
inline OracleExchange query(OracleBackend& backend, ExchangeLog& log,
                            const std::string& prompt, PromptKind kind,
                            const std::vector<std::string>& options = {}) {
    OracleExchange ex;
    ex.kind = kind;
    ex.prompt = prompt;
    ex.backend = backend.tag();
    auto t0 = std::chrono::steady_clock::now();
    ex.completion = backend.complete(prompt, kind);
    ex.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    std::vector<std::string> opts = options;
    if (kind == PromptKind::Selection && opts.empty()) opts = selection_options(prompt);
    ex.verdict = parse_verdict(ex.completion, kind, opts);
    ex.id = log.append(ex);
    return ex;
}

// ---------------------------------------------------------------------------
// Mock knowledge base

/// Deterministic stand-in rules. Feasibility defaults to yes, affordances to
/// no; both are overridden by explicit rows.
///
///   no <verb|*> :: <keyword>[, <keyword>...] [@subject]
///   yes <verb> :: <object class>
///   prefer <task phrase> :: <class>[, <class>...]
struct MockRules {
    struct FeasibilityRule {
        std::string verb; // "*" matches any
        std::vector<std::string> keywords;
        bool subject_in_action = false;
    };
    struct PreferenceRule {
        std::string task;    // phrase matched against the prompt
        std::string keyword; // optional situation word, "" matches anything
        std::vector<std::string> ranked;
    };
    std::vector<FeasibilityRule> infeasibility;
    std::vector<std::pair<std::string, std::string>> affordances; // (verb, class)
    std::vector<PreferenceRule> preferences;
    NounLexicon nouns;

    static MockRules from_text(std::string_view text) {
        MockRules rules;
        for (const auto& raw : str::split(text, '\n')) {
            std::string line = str::trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (str::starts_with(line, "noun ")) {
                rules.nouns.add(line.substr(5));
                continue;
            }
            auto sep = line.find("::");
            if (sep == std::string::npos)
                throw FormatError("mock rule lacks '::': " + line);
            std::string head = str::trim(line.substr(0, sep));
            std::string body = str::trim(line.substr(sep + 2));
            auto head_parts = str::split(head, ' ');
            std::erase_if(head_parts, [](const std::string& s) { return s.empty(); });
            if (head_parts.empty()) throw FormatError("empty mock rule head: " + line);
            const std::string& directive = head_parts[0];
            if (directive == "no") {
                if (head_parts.size() != 2)
                    throw FormatError("expected 'no <verb> :: ...': " + line);
                FeasibilityRule rule;
                rule.verb = str::lower(head_parts[1]);
                for (auto& kw : str::split(body, ',')) {
                    std::string k = str::lower(str::trim(kw));
                    if (k == "@subject")
                        rule.subject_in_action = true;
                    else if (!k.empty())
                        rule.keywords.push_back(k);
                }
                rules.infeasibility.push_back(std::move(rule));
            } else if (directive == "yes") {
                if (head_parts.size() != 2)
                    throw FormatError("expected 'yes <verb> :: <class>': " + line);
                rules.affordances.emplace_back(str::lower(head_parts[1]),
                                               str::lower(str::trim(body)));
            } else if (directive == "prefer") {
                PreferenceRule rule;
                std::string spec = str::trim(head.substr(head.find(' ') + 1));
                if (auto bar = spec.find('|'); bar != std::string::npos) {
                    rule.keyword = str::lower(str::trim(spec.substr(bar + 1)));
                    spec = str::trim(spec.substr(0, bar));
                }
                rule.task = str::lower(spec);
                for (auto& item : str::split(body, ','))
                    if (!str::trim(item).empty())
                        rule.ranked.push_back(str::lower(str::trim(item)));
                rules.preferences.push_back(std::move(rule));
            } else {
                throw FormatError("unknown mock directive '" + directive + "'");
            }
        }
        return rules;
    }

    /// Ground-truth check shared by the mock oracle and the trial judge.
    bool action_feasible(const std::string& action_nl,
                         const std::string& situation_text) const {
        if (str::trim(situation_text).empty()) return true;
        auto action_words = str::words(action_nl);
        std::string verb = action_words.empty() ? "" : action_words[0];
        for (const auto& rule : infeasibility) {
            if (rule.verb != "*" && rule.verb != verb) continue;
            bool all = true;
            for (const auto& kw : rule.keywords)
                if (!str::phrase_in(kw, situation_text)) all = false;
            if (!all) continue;
            if (rule.subject_in_action) {
                auto subject = nouns.subject_of(situation_text);
                if (!subject) continue;
                if (!str::phrase_in(str::to_phrase(*subject), action_nl)) continue;
            }
            return false;
        }
        return true;
    }

    bool affords(const std::string& verb, const std::string& object_class_phrase) const {
        for (const auto& [v, cls] : affordances)
            if (v == verb && cls == str::lower(object_class_phrase)) return true;
        return false;
    }

    /// First preference row matching the prompt (task phrase, plus situation
    /// keyword when given) that ranks one of the listed options.
    std::optional<std::string> preferred(const std::string& prompt,
                                         const std::vector<std::string>& options) const {
        for (const auto& rule : preferences) {
            if (!str::phrase_in(rule.task, prompt)) continue;
            if (!rule.keyword.empty() && !str::phrase_in(rule.keyword, prompt)) continue;
            for (const auto& want : rule.ranked)
                for (const auto& option : options)
                    if (str::lower(option) == want) return option;
        }
        return std::nullopt;
    }
};

/// Offline oracle: answers prompts by rule lookup, deterministically.
class MockOracle : public OracleBackend {
public:
    explicit MockOracle(MockRules rules) : rules_(std::move(rules)) {}

    const MockRules& rules() const { return rules_; }

    std::string complete(const std::string& prompt, PromptKind kind) override {
        switch (kind) {
            case PromptKind::Feasibility: {
                auto [action, situation] = split_feasibility(prompt);
                return rules_.action_feasible(action, situation) ? "Yes." : "No.";
            }
            case PromptKind::Affordance: {
                std::string action = strip_frame(prompt);
                auto tokens = str::words(action);
                std::string verb = tokens.empty() ? "" : tokens[0];
                for (const auto& [v, cls] : rules_.affordances) {
                    if (v != verb) continue;
                    if (str::phrase_in(cls, action)) return "Yes.";
                }
                return "No.";
            }
            case PromptKind::Selection: {
                auto options = selection_options(prompt);
                if (options.empty()) return "";
                if (auto preferred = rules_.preferred(prompt, options))
                    return *preferred + ".";
                return options.front() + ".";
            }
            case PromptKind::Symbolize:
                return ""; // the offline route symbolizes through the lexicon
        }
        return "";
    }

    std::string tag() const override { return "mock"; }

private:
    static std::string strip_frame(const std::string& prompt) {
        std::string s = prompt;
        const std::string prefix = "Is it suitable for a robot to ";
        if (str::starts_with(s, prefix)) s = s.substr(prefix.size());
        while (!s.empty() && (s.back() == '?' || s.back() == ' ')) s.pop_back();
        return s;
    }

    static std::pair<std::string, std::string> split_feasibility(const std::string& prompt) {
        std::string s = strip_frame(prompt);
        auto sep = s.rfind(", if ");
        if (sep == std::string::npos) return {s, ""};
        return {s.substr(0, sep), s.substr(sep + 5)};
    }

    MockRules rules_;
};

// ---------------------------------------------------------------------------
// Few-shot predicate generation (the remote symbolization route; the local
// route is the lexicon in nl.hpp)

/// Substitutes the situation into a few-shot preamble carrying a
/// "{situation}" placeholder.
inline std::string render_symbolize_prompt(const std::string& preamble,
                                           const std::string& situation) {
    const std::string placeholder = "{situation}";
    auto pos = preamble.find(placeholder);
    if (pos == std::string::npos)
        throw FormatError("few-shot preamble lacks a {situation} placeholder");
    std::string out = preamble;
    out.replace(pos, placeholder.size(), str::trim(situation));
    return out;
}

/// Reads "(predicate subject)" out of a completion; anything else is nothing.
inline std::optional<Literal> parse_symbolized_literal(const std::string& completion) {
    auto open = completion.find('(');
    auto close = completion.find(')', open);
    if (open == std::string::npos || close == std::string::npos) return std::nullopt;
    auto tokens = str::words(completion.substr(open + 1, close - open - 1));
    if (tokens.size() != 2) return std::nullopt;
    return Literal{tokens[0], {tokens[1]}, false};
}

/// Closed-world baseline oracle: everything is feasible, nothing novel is
/// granted, selections take the first option.
class AlwaysYesOracle : public OracleBackend {
public:
    std::string complete(const std::string& prompt, PromptKind kind) override {
        if (kind == PromptKind::Selection) {
            auto options = selection_options(prompt);
            return options.empty() ? "" : options.front() + ".";
        }
        return "Yes.";
    }
    std::string tag() const override { return "always-yes"; }
};

/// Replays a recorded exchange transcript; prompts must match in order.
class ReplayOracle : public OracleBackend {
public:
    explicit ReplayOracle(const std::vector<OracleExchange>& transcript) {
        for (const auto& ex : transcript) queue_.push_back({ex.prompt, ex.completion});
    }

    std::string complete(const std::string& prompt, PromptKind) override {
        if (queue_.empty())
            throw TransportError("replay transcript exhausted at prompt: " + prompt);
        auto [expected, completion] = queue_.front();
        if (expected != prompt)
            throw TransportError("replay divergence; expected prompt: " + expected +
                                 " got: " + prompt);
        queue_.pop_front();
        return completion;
    }

    bool exhausted() const { return queue_.empty(); }

    std::string tag() const override { return "replay"; }

private:
    std::deque<std::pair<std::string, std::string>> queue_;
};

} // namespace cowp
