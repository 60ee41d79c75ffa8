#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cowp/bundle.hpp"
#include "cowp/engine.hpp"

namespace cowp {

struct TrialConfig {
    std::string task = "Serve water";
    uint64_t seed = 42;
    double inject_p = 0.1;
    size_t trials = 150;
    size_t jobs = 1;
    EngineConfig engine;
};

struct TrialRecord {
    size_t index = 0;
    EpisodeResult::Outcome outcome = EpisodeResult::Outcome::Failed;
    std::string failure_reason;
    size_t encountered = 0;
    size_t handled = 0;
    std::string situation;
    std::string subject; // identifier of the situation's object, "" if none
    size_t executed_steps = 0;
    size_t planner_calls = 0;
};

struct ObjectBreakdown {
    size_t encountered = 0;
    size_t handled = 0;
};

struct Metrics {
    size_t trials = 0;
    size_t completed = 0;
    size_t no_solution = 0;
    size_t failed = 0;
    size_t encountered = 0;
    size_t handled = 0;
    std::map<std::string, ObjectBreakdown> per_object;

    double completion_pct() const {
        return trials == 0 ? 0.0 : 100.0 * static_cast<double>(completed) /
                                       static_cast<double>(trials);
    }

    /// Undefined (and reported as such) when no situations were encountered.
    std::optional<double> handling_pct() const {
        if (encountered == 0) return std::nullopt;
        return 100.0 * static_cast<double>(handled) / static_cast<double>(encountered);
    }
};

struct TrialsResult {
    std::string task;
    Metrics metrics;
    std::vector<TrialRecord> records;
};

/// N independent episodes: fresh object spawn and injection stream per trial,
/// all derived from the master seed. Records are aggregated in trial order,
/// so the result is identical for any job count.
inline TrialsResult run_trials(const DataBundle& bundle, const TrialConfig& config,
                               OracleBackend& oracle) {
    const TaskFixture* fixture = bundle.fixture(config.task);
    if (!fixture) throw MissingTask("no fixture for task '" + config.task + "'");

    TrialsResult result;
    result.task = fixture->display;
    result.records.resize(config.trials);

    auto run_one = [&](size_t i) {
        SimEnv env;
        env.objects = spawn_objects(bundle.catalog, derive_seed(config.seed, 1, i));
        env.judge = &bundle.rules;
        env.dataset = &bundle.dataset;
        env.task = fixture->ident;
        env.inject_p = config.inject_p;
        env.rng = Rng(derive_seed(config.seed, 2, i));

        EngineConfig cfg = config.engine;
        cfg.task_nl = fixture->nl;
        EpisodeResult ep = run_episode(fixture->domain, fixture->problem, env, oracle,
                                       bundle.lexicon, bundle.patterns, cfg);
        TrialRecord rec;
        rec.index = i;
        rec.outcome = ep.outcome;
        rec.failure_reason = ep.failure_reason;
        rec.encountered = ep.situations_encountered;
        rec.handled = ep.situations_handled;
        if (ep.situation) {
            rec.situation = ep.situation->text;
            rec.subject = bundle.rules.nouns.subject_of(rec.situation).value_or("");
        }
        rec.executed_steps = ep.executed.size();
        rec.planner_calls = ep.planner_calls;
        result.records[i] = std::move(rec);
    };

    size_t jobs = std::max<size_t>(1, config.jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < config.trials; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (size_t w = 0; w < std::min(jobs, config.trials); ++w) {
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < config.trials;
                     i = next.fetch_add(1))
                    run_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    Metrics& m = result.metrics;
    m.trials = config.trials;
    for (const auto& rec : result.records) {
        switch (rec.outcome) {
            case EpisodeResult::Outcome::Completed: ++m.completed; break;
            case EpisodeResult::Outcome::NoSolution: ++m.no_solution; break;
            case EpisodeResult::Outcome::Failed: ++m.failed; break;
        }
        m.encountered += rec.encountered;
        m.handled += rec.handled;
        if (rec.encountered > 0 && !rec.subject.empty()) {
            auto& obj = m.per_object[rec.subject];
            obj.encountered += rec.encountered;
            obj.handled += rec.handled;
        }
    }
    return result;
}

inline nlohmann::json to_json(const Metrics& m) {
    nlohmann::json per_object = nlohmann::json::object();
    for (const auto& [subject, b] : m.per_object)
        per_object[subject] = {{"encountered", b.encountered}, {"handled", b.handled}};
    nlohmann::json j{{"trials", m.trials},
                     {"completed", m.completed},
                     {"no_solution", m.no_solution},
                     {"failed", m.failed},
                     {"situations_encountered", m.encountered},
                     {"situations_handled", m.handled},
                     {"task_completion_pct", m.completion_pct()},
                     {"per_object", per_object}};
    if (auto h = m.handling_pct())
        j["situation_handling_pct"] = *h;
    else
        j["situation_handling_pct"] = nullptr;
    return j;
}

inline nlohmann::json to_json(const TrialsResult& r) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : r.records) {
        records.push_back({{"index", rec.index},
                           {"outcome", EpisodeResult::outcome_name(rec.outcome)},
                           {"situation", rec.situation},
                           {"subject", rec.subject},
                           {"handled", rec.handled},
                           {"executed_steps", rec.executed_steps}});
    }
    return nlohmann::json{
        {"task", r.task}, {"metrics", to_json(r.metrics)}, {"trials", records}};
}

/// Aligned two-row text table over any number of task columns.
inline std::string metrics_table(
    const std::vector<std::pair<std::string, Metrics>>& columns) {
    auto fmt_pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", v);
        return std::string(buf);
    };
    std::vector<std::string> headers{""};
    std::vector<std::string> completion{"Task completion percentage (%)"};
    std::vector<std::string> handling{"Situation handling percentage (%)"};
    for (const auto& [name, m] : columns) {
        headers.push_back(name);
        completion.push_back(fmt_pct(m.completion_pct()));
        auto h = m.handling_pct();
        handling.push_back(h ? fmt_pct(*h) : "n/a");
    }
    std::vector<size_t> width(headers.size(), 0);
    for (size_t c = 0; c < headers.size(); ++c)
        width[c] = std::max({headers[c].size(), completion[c].size(), handling[c].size()});
    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            out.append(width[c] - row[c].size() + 2, ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    };
    emit(headers);
    emit(completion);
    emit(handling);
    return out;
}

} // namespace cowp
