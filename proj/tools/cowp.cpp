// cowp: open-world task planning toolkit command line.
//
// Subcommands: parse, plan, surgeon, monitor, run, trials, report.
// Exit codes: 0 success, 1 usage/internal error, 2 no solution,
// 3 resource exhaustion, 4 transport/auth failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "cowp/bundle.hpp"
#include "cowp/config.hpp"
#include "cowp/diff.hpp"
#include "cowp/engine.hpp"
#include "cowp/monitor.hpp"
#include "cowp/oracle_remote.hpp"
#include "cowp/pddl_printer.hpp"
#include "cowp/trials.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoSolution = 2;
constexpr int kExitExhausted = 3;
constexpr int kExitTransport = 4;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cowp::Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void append_exchanges_jsonl(const std::string& path,
                            const std::vector<cowp::OracleExchange>& exchanges) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::app);
    if (!out) throw cowp::Error("cannot open exchange log " + path);
    for (const auto& ex : exchanges) out << cowp::to_json(ex).dump() << "\n";
}

struct Shared {
    cowp::AppConfig config;
    std::string config_file;
    bool json = false;

    cowp::DataBundle& bundle() {
        if (!bundle_) bundle_ = std::make_unique<cowp::DataBundle>(
                          cowp::load_bundle(config.data_dir));
        return *bundle_;
    }

    std::unique_ptr<cowp::OracleBackend> make_oracle(const std::string& kind) {
        if (kind == "mock")
            return std::make_unique<cowp::MockOracle>(bundle().rules);
        if (kind == "always-yes") return std::make_unique<cowp::AlwaysYesOracle>();
        if (kind == "remote") return std::make_unique<cowp::RemoteOracle>(config.oracle);
        throw cowp::ConfigError("unknown oracle '" + kind + "' (mock|always-yes|remote)");
    }

    cowp::EngineConfig engine_config() const {
        cowp::EngineConfig cfg;
        cfg.acquisition_cap = config.acquisition_rounds;
        cfg.node_budget = config.node_budget;
        cfg.ground_capacity = config.ground_capacity;
        cfg.watchdog = config.watchdog;
        return cfg;
    }

private:
    std::unique_ptr<cowp::DataBundle> bundle_;
};

void print_exchanges(const std::vector<cowp::OracleExchange>& exchanges) {
    for (const auto& ex : exchanges) {
        std::cout << "  [" << ex.id << "] " << ex.prompt << "\n";
        std::cout << "        -> " << ex.completion << "  (" << ex.verdict.to_string()
                  << ")\n";
    }
}

int cmd_parse(Shared& shared, const std::string& domain_path,
              const std::string& problem_path) {
    cowp::DomainDescription d = cowp::parse_domain(slurp(domain_path));
    std::cout << cowp::serialize_domain(d);
    if (!problem_path.empty()) {
        cowp::ProblemDescription p = cowp::parse_problem(slurp(problem_path), d);
        std::cout << cowp::serialize_problem(p);
    }
    return kExitOk;
}

int cmd_plan(Shared& shared, const std::string& domain_path,
             const std::string& problem_path, size_t budget) {
    cowp::DomainDescription d = cowp::parse_domain(slurp(domain_path));
    cowp::ProblemDescription p = cowp::parse_problem(slurp(problem_path), d);
    cowp::PlannerLimits limits;
    limits.node_budget = budget ? budget : shared.config.node_budget;
    limits.ground_capacity = shared.config.ground_capacity;
    cowp::PlannerOutcome out = cowp::plan(d, p, limits);
    switch (out.kind) {
        case cowp::PlannerOutcome::Kind::Found:
            if (shared.json) {
                nlohmann::json steps = nlohmann::json::array();
                for (const auto& s : out.plan.steps) steps.push_back(s.to_string());
                std::cout << nlohmann::json{{"plan", steps},
                                            {"expanded", out.expanded}}
                                 .dump(2)
                          << "\n";
            } else {
                std::cout << cowp::format_plan(out.plan.steps);
            }
            return kExitOk;
        case cowp::PlannerOutcome::Kind::NoSolution:
            std::cerr << "no solution\n";
            return kExitNoSolution;
        case cowp::PlannerOutcome::Kind::ResourceExhausted:
            std::cerr << "node budget exhausted after " << out.expanded
                      << " expansions\n";
            return kExitExhausted;
    }
    return kExitUsage;
}

int cmd_surgeon(Shared& shared, const std::string& domain_path,
                const std::string& problem_path, const std::string& script_path) {
    cowp::DomainDescription d = cowp::parse_domain(slurp(domain_path));
    cowp::ProblemDescription p = cowp::parse_problem(slurp(problem_path), d);
    std::string before_d = cowp::serialize_domain(d);
    std::string before_p = cowp::serialize_problem(p);
    cowp::ScriptResult result = cowp::run_mutation_script(slurp(script_path), d, p);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::string after_d = cowp::serialize_domain(result.domain);
    std::string after_p = cowp::serialize_problem(result.problem);
    std::cout << after_d << after_p;
    std::cout << "--- domain diff ---\n" << cowp::unified_diff(before_d, after_d);
    std::cout << "--- problem diff ---\n" << cowp::unified_diff(before_p, after_p);
    return kExitOk;
}

int cmd_monitor(Shared& shared, const std::string& domain_path,
                const std::string& problem_path, const std::string& plan_path,
                const std::string& situation, const std::string& oracle_kind,
                const std::string& exchange_log) {
    cowp::DomainDescription d = cowp::parse_domain(slurp(domain_path));
    cowp::ProblemDescription p = cowp::parse_problem(slurp(problem_path), d);
    cowp::Plan plan = cowp::parse_plan_text(slurp(plan_path), d);
    auto oracle = shared.make_oracle(oracle_kind);
    cowp::ExchangeLog log;
    cowp::FeasibilityVerdict v = cowp::monitor_plan(plan, situation, *oracle, log,
                                                    shared.bundle().patterns);
    if (v.feasible) {
        std::cout << "feasible (" << v.queries << " queries)\n";
    } else {
        std::cout << "infeasible at step " << (v.step_index + 1) << ": "
                  << v.action.to_string() << "\n";
    }
    print_exchanges(log.snapshot());
    append_exchanges_jsonl(exchange_log, log.snapshot());
    return kExitOk;
}

int episode_exit_code(const cowp::EpisodeResult& r) {
    switch (r.outcome) {
        case cowp::EpisodeResult::Outcome::Completed: return kExitOk;
        case cowp::EpisodeResult::Outcome::NoSolution: return kExitNoSolution;
        case cowp::EpisodeResult::Outcome::Failed:
            if (r.failure_reason.find("budget") != std::string::npos ||
                r.failure_reason.find("watchdog") != std::string::npos)
                return kExitExhausted;
            return kExitExhausted;
    }
    return kExitUsage;
}

int cmd_run(Shared& shared, std::string domain_path, std::string problem_path,
            const std::string& task, const std::string& situation, double inject_p,
            uint64_t seed, const std::string& oracle_kind,
            const std::string& objects_csv, const std::string& exchange_log) {
    cowp::DataBundle& bundle = shared.bundle();
    const cowp::TaskFixture* fixture = bundle.fixture(task);
    cowp::DomainDescription d;
    cowp::ProblemDescription p;
    std::string task_nl = task;
    std::string task_ident = cowp::task_identifier(task);
    if (!domain_path.empty()) {
        d = cowp::parse_domain(slurp(domain_path));
        p = cowp::parse_problem(slurp(problem_path), d);
        if (fixture) task_nl = fixture->nl;
    } else {
        if (!fixture) throw cowp::MissingTask("no bundled fixture for task '" + task + "'");
        d = fixture->domain;
        p = fixture->problem;
        task_nl = fixture->nl;
    }

    cowp::SimEnv env;
    if (!objects_csv.empty()) {
        for (auto& item : cowp::str::split(objects_csv, ',')) {
            std::string ident = cowp::str::to_identifier(item);
            if (!ident.empty()) env.objects.emplace_back(ident, ident);
        }
    } else {
        env.objects = cowp::spawn_objects(bundle.catalog, seed);
    }
    env.judge = &bundle.rules;
    if (!situation.empty()) {
        cowp::Situation s;
        s.task = task_ident;
        s.text = situation;
        s.group = 1;
        env.forced = s;
    } else {
        env.dataset = &bundle.dataset;
        env.task = task_ident;
        env.inject_p = inject_p;
        env.rng = cowp::Rng(cowp::derive_seed(seed, 2, 0));
    }

    auto oracle = shared.make_oracle(oracle_kind);
    cowp::EngineConfig cfg = shared.engine_config();
    cfg.task_nl = task_nl;
    auto symbolize_log = std::make_shared<cowp::ExchangeLog>();
    if (oracle_kind == "remote") {
        // Remote runs symbolize through the few-shot predicate generator.
        std::string preamble = slurp(shared.config.data_dir + "/predicate_fewshot.txt");
        cowp::OracleBackend* backend = oracle.get();
        cfg.oracle_symbolizer = [backend, symbolize_log,
                                 preamble](const std::string& text) {
            auto ex = cowp::query(*backend, *symbolize_log,
                                  cowp::render_symbolize_prompt(preamble, text),
                                  cowp::PromptKind::Symbolize);
            return cowp::parse_symbolized_literal(ex.completion);
        };
    }
    cowp::EpisodeResult r =
        cowp::run_episode(d, p, env, *oracle, bundle.lexicon, bundle.patterns, cfg);
    append_exchanges_jsonl(exchange_log, r.exchanges);
    append_exchanges_jsonl(exchange_log, symbolize_log->snapshot());

    if (shared.json) {
        std::cout << cowp::to_json(r).dump(2) << "\n";
    } else {
        std::cout << "outcome: " << cowp::EpisodeResult::outcome_name(r.outcome);
        if (!r.failure_reason.empty()) std::cout << " (" << r.failure_reason << ")";
        std::cout << "\n";
        if (r.situation)
            std::cout << "situation: " << r.situation->text << " (handled "
                      << r.situations_handled << "/" << r.situations_encountered
                      << ")\n";
        std::cout << "executed:\n" << cowp::format_plan(r.executed);
        if (!r.surgery.entries.empty()) {
            std::cout << "surgery:\n";
            for (const auto& m : r.surgery.entries)
                std::cout << "  " << cowp::Mutation::kind_name(m.kind) << " "
                          << (m.kind == cowp::Mutation::Kind::ActionExtended
                                  ? m.fact.action + " += " + m.fact.object_class
                                  : m.action.empty() ? m.literal.to_string()
                                                     : m.action + " += " +
                                                           m.literal.to_string())
                          << "\n";
        }
        std::cout << "oracle exchanges: " << r.exchanges.size() << "\n";
        print_exchanges(r.exchanges);
    }
    return episode_exit_code(r);
}

int cmd_trials(Shared& shared, const std::string& task, size_t trials, uint64_t seed,
               double inject_p, const std::string& oracle_kind, size_t jobs) {
    cowp::DataBundle& bundle = shared.bundle();
    auto oracle = shared.make_oracle(oracle_kind);

    std::vector<std::string> tasks;
    if (task == "all") {
        for (const auto& t : bundle.tasks) tasks.push_back(t.display);
    } else {
        tasks.push_back(task);
    }

    nlohmann::json all = nlohmann::json::array();
    std::vector<std::pair<std::string, cowp::Metrics>> columns;
    for (const auto& name : tasks) {
        cowp::TrialConfig cfg;
        cfg.task = name;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.inject_p = inject_p;
        cfg.jobs = jobs;
        cfg.engine = shared.engine_config();
        cowp::TrialsResult r = cowp::run_trials(bundle, cfg, *oracle);
        all.push_back(cowp::to_json(r));
        columns.emplace_back(r.task, r.metrics);
    }
    if (shared.json) {
        std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
    } else {
        std::cout << cowp::metrics_table(columns);
    }
    return kExitOk;
}

int cmd_report(Shared&, const std::vector<std::string>& metric_files) {
    std::vector<std::pair<std::string, cowp::Metrics>> columns;
    for (const auto& path : metric_files) {
        nlohmann::json doc = nlohmann::json::parse(slurp(path));
        nlohmann::json items = doc.is_array() ? doc : nlohmann::json::array({doc});
        for (const auto& item : items) {
            cowp::Metrics m;
            const auto& mj = item.at("metrics");
            m.trials = mj.at("trials").get<size_t>();
            m.completed = mj.at("completed").get<size_t>();
            m.no_solution = mj.at("no_solution").get<size_t>();
            m.failed = mj.at("failed").get<size_t>();
            m.encountered = mj.at("situations_encountered").get<size_t>();
            m.handled = mj.at("situations_handled").get<size_t>();
            columns.emplace_back(item.at("task").get<std::string>(), m);
        }
    }
    std::cout << cowp::metrics_table(columns);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cowp: open-world task planning toolkit"};
    app.require_subcommand(1);

    Shared shared;
    shared.config.data_dir = COWP_DATA_DIR;

    app.add_option("--config", shared.config_file, "key=value configuration file");
    app.add_option("--data", shared.config.data_dir, "data directory");
    app.add_flag("--json", shared.json, "machine-readable output on stdout");

    std::string domain_path, problem_path, plan_path, script_path;
    std::string task = "Serve water";
    std::string situation;
    std::string oracle_kind = "mock";
    std::string objects_csv;
    std::string exchange_log;
    double inject_p = 0.1;
    uint64_t seed = 0;
    size_t trials = 150;
    size_t jobs = 1;
    size_t budget = 0;
    std::vector<std::string> metric_files;

    CLI::App* parse_cmd = app.add_subcommand("parse", "parse and reprint PDDL");
    parse_cmd->add_option("--domain", domain_path, "domain file")->required();
    parse_cmd->add_option("--problem", problem_path, "problem file");

    CLI::App* plan_cmd = app.add_subcommand("plan", "compute a plan");
    plan_cmd->add_option("--domain", domain_path, "domain file")->required();
    plan_cmd->add_option("--problem", problem_path, "problem file")->required();
    plan_cmd->add_option("--budget", budget, "node expansion budget");

    CLI::App* surgeon_cmd = app.add_subcommand("surgeon", "apply a mutation script");
    surgeon_cmd->add_option("--domain", domain_path, "domain file")->required();
    surgeon_cmd->add_option("--problem", problem_path, "problem file")->required();
    surgeon_cmd->add_option("--script", script_path, "mutation script")->required();

    CLI::App* monitor_cmd = app.add_subcommand("monitor", "check plan feasibility");
    monitor_cmd->add_option("--domain", domain_path, "domain file")->required();
    monitor_cmd->add_option("--problem", problem_path, "problem file")->required();
    monitor_cmd->add_option("--plan", plan_path, "plan file")->required();
    monitor_cmd->add_option("--situation", situation, "situation text")->required();
    monitor_cmd->add_option("--oracle", oracle_kind, "mock|always-yes|remote");
    monitor_cmd->add_option("--exchange-log", exchange_log, "append exchanges as JSON lines");

    CLI::App* run_cmd = app.add_subcommand("run", "run one episode");
    run_cmd->add_option("--domain", domain_path, "domain file (default: bundled fixture)");
    run_cmd->add_option("--problem", problem_path, "problem file");
    run_cmd->add_option("--task", task, "task name")->required();
    run_cmd->add_option("--situation", situation, "forced situation text");
    run_cmd->add_option("--inject-prob", inject_p, "per-action injection probability");
    run_cmd->add_option("--oracle", oracle_kind, "mock|always-yes|remote");
    run_cmd->add_option("--seed", seed, "random seed");
    run_cmd->add_option("--objects", objects_csv,
                        "comma-separated environment objects (overrides spawning)");
    run_cmd->add_option("--exchange-log", exchange_log, "append exchanges as JSON lines");

    CLI::App* trials_cmd = app.add_subcommand("trials", "run trial batches");
    trials_cmd->add_option("--task", task, "task name or 'all'")->required();
    trials_cmd->add_option("--trials", trials, "episodes per task");
    trials_cmd->add_option("--seed", seed, "master seed");
    trials_cmd->add_option("--inject-prob", inject_p, "per-action injection probability");
    trials_cmd->add_option("--oracle", oracle_kind, "mock|always-yes|remote");
    trials_cmd->add_option("--jobs", jobs, "concurrent episodes");

    CLI::App* report_cmd = app.add_subcommand("report", "format trials JSON as a table");
    report_cmd->add_option("files", metric_files, "trials --json output files")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (!shared.config_file.empty()) shared.config.load_file(shared.config_file);
        shared.config.load_env();
        // Flags win over file and environment.
        for (auto* opt : {app.get_option("--data")})
            if (opt->count()) shared.config.data_dir = opt->as<std::string>();

        if (parse_cmd->parsed()) return cmd_parse(shared, domain_path, problem_path);
        if (plan_cmd->parsed()) return cmd_plan(shared, domain_path, problem_path, budget);
        if (surgeon_cmd->parsed())
            return cmd_surgeon(shared, domain_path, problem_path, script_path);
        if (monitor_cmd->parsed())
            return cmd_monitor(shared, domain_path, problem_path, plan_path, situation,
                               oracle_kind, exchange_log);
        if (run_cmd->parsed()) {
            bool forced = !situation.empty();
            if (forced && run_cmd->get_option("--inject-prob")->count()) {
                std::cerr << "--situation and --inject-prob are mutually exclusive\n";
                return kExitUsage;
            }
            double p = run_cmd->get_option("--inject-prob")->count()
                           ? inject_p
                           : shared.config.inject_p;
            return cmd_run(shared, domain_path, problem_path, task, situation, p, seed,
                           oracle_kind, objects_csv, exchange_log);
        }
        if (trials_cmd->parsed()) {
            double p = trials_cmd->get_option("--inject-prob")->count()
                           ? inject_p
                           : shared.config.inject_p;
            return cmd_trials(shared, task, trials, seed, p, oracle_kind, jobs);
        }
        if (report_cmd->parsed()) return cmd_report(shared, metric_files);
    } catch (const cowp::AuthError& e) {
        std::cerr << "auth error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const cowp::TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const cowp::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitExhausted;
    } catch (const cowp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
