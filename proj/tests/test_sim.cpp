#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cowp/bundle.hpp"
#include "cowp/trials.hpp"

#include "support/fixtures.hpp"

using namespace cowp;

namespace {

const DataBundle& bundle() {
    static DataBundle b = load_bundle(testutil::data_dir());
    return b;
}

std::string write_temp(const std::string& name, const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

} // namespace

TEST_CASE("load_dataset reads the bundled serve-water sheet") {
    SituationDataset ds = load_dataset(testutil::data_dir() + "/situations/serve_water.csv");
    REQUIRE(ds.sheet("serve_water") != nullptr);
    CHECK(ds.distinguishable("serve_water") == 15);
    // Near-duplicates share a group: broken and shattered are one situation.
    const TaskSheet* sheet = ds.sheet("serve_water");
    CHECK(sheet->rows.size() > 15);
    CHECK(sheet->representative(1)->text == "Cup is broken.");
}

TEST_CASE("load_dataset rejects malformed sheets") {
    std::string bad = write_temp("bad_group.csv",
                                 "situation,step,group,group_description,group_count\n"
                                 "Cup is broken.,Step 1,0,broken,1\n");
    CHECK_THROWS_AS(load_dataset(bad), FormatError);

    std::string gap = write_temp("gap_group.csv",
                                 "situation,step,group,group_description,group_count\n"
                                 "A.,s,1,a,13\nB.,s,3,b,13\n");
    CHECK_THROWS_AS(load_dataset(gap), FormatError);

    std::string missing = write_temp("short.csv", "just,three,cols\n");
    CHECK_THROWS_AS(load_dataset(missing), FormatError);
}

TEST_CASE("load_dataset on the bundled directory matches the per-task counts") {
    const SituationDataset& ds = bundle().dataset;
    for (const auto& [display, expected] : task_table()) {
        INFO(display);
        CHECK(ds.distinguishable(task_identifier(display)) == expected);
    }
}

TEST_CASE("load_dataset reports tasks absent from a directory") {
    auto dir = std::filesystem::temp_directory_path() / "cowp_empty_dataset";
    std::filesystem::create_directories(dir);
    CHECK_THROWS_AS(load_dataset(dir.string()), MissingTask);
}

TEST_CASE("load_dataset accepts the concatenated single-file form") {
    // Rebuild one file from two bundled sheets with a leading task column.
    std::string combined = "task,situation,step,group,group_description,group_count\n";
    for (const char* ident : {"serve_water", "wash_glass"}) {
        const TaskSheet* sheet = bundle().dataset.sheet(ident);
        for (const auto& s : sheet->rows) {
            std::string text = s.text;
            bool quote = text.find(',') != std::string::npos;
            combined += std::string(ident) + "," +
                        (quote ? "\"" + text + "\"" : text) + "," + s.step_ref + "," +
                        std::to_string(s.group) + "," + s.group_description + "," +
                        std::to_string(sheet->distinguishable) + "\n";
        }
    }
    std::string path = write_temp("combined.csv", combined);
    SituationDataset ds = load_dataset(path);
    CHECK(ds.distinguishable("serve_water") == 15);
    CHECK(ds.distinguishable("wash_glass") == 12);
    CHECK(*ds.sheet("serve_water") == *bundle().dataset.sheet("serve_water"));
}

TEST_CASE("the object catalog holds the pinned category counts") {
    const ObjectCatalog& catalog = bundle().catalog;
    CHECK(catalog.entries.size() == 86);
    CHECK(catalog.category_count("kitchenware") == 29);
    CHECK(catalog.category_count("drink") == 8);
    size_t total = 0;
    for (const auto& cat : catalog_categories()) total += catalog.category_count(cat);
    CHECK(total == 86);

    std::string bad = write_temp("bad_catalog.csv", "name,category\ncup,kitchenware\n");
    CHECK_THROWS_AS(load_catalog(bad), FormatError);
}

TEST_CASE("spawn_objects draws half the catalog deterministically") {
    auto a = spawn_objects(bundle().catalog, 7);
    auto b = spawn_objects(bundle().catalog, 7);
    auto c = spawn_objects(bundle().catalog, 8);
    CHECK(a.size() == 43);
    CHECK(a == b);
    CHECK(a != c);
    // Catalog order is preserved.
    std::vector<std::string> names;
    for (const auto& [name, cls] : a) names.push_back(name);
    CHECK(std::is_sorted(names.begin(), names.end(), [&](const auto& x, const auto& y) {
        auto index = [&](const std::string& n) {
            for (size_t i = 0; i < bundle().catalog.entries.size(); ++i)
                if (str::to_identifier(bundle().catalog.entries[i].name) == n) return i;
            return size_t(99);
        };
        return index(x) < index(y);
    }));
}

TEST_CASE("spawn inclusion frequency is near one half") {
    std::map<std::string, size_t> hits;
    const int seeds = 400;
    for (int s = 0; s < seeds; ++s)
        for (const auto& [name, cls] : spawn_objects(bundle().catalog, s)) ++hits[name];
    for (const auto& e : bundle().catalog.entries) {
        double freq = static_cast<double>(hits[str::to_identifier(e.name)]) / seeds;
        INFO(e.name);
        CHECK(freq > 0.40);
        CHECK(freq < 0.60);
    }
}

TEST_CASE("maybe_inject draws before actions with at most one hit per trial") {
    SimEnv env;
    env.dataset = &bundle().dataset;
    env.task = "serve_water";

    SECTION("P=0 never injects") {
        env.inject_p = 0.0;
        env.rng = Rng(1);
        for (size_t step = 0; step < 100; ++step)
            CHECK_FALSE(env.maybe_inject(step).has_value());
    }

    SECTION("P=1 injects a listed situation immediately, then stays quiet") {
        env.inject_p = 1.0;
        env.rng = Rng(1);
        auto s = env.maybe_inject(0);
        REQUIRE(s.has_value());
        const TaskSheet* sheet = bundle().dataset.sheet("serve_water");
        bool member = false;
        for (const auto& row : sheet->rows)
            if (row.text == s->text) member = true;
        CHECK(member);
        CHECK_FALSE(env.maybe_inject(1).has_value());
        CHECK_FALSE(env.maybe_inject(2).has_value());
    }

    SECTION("injection rate tracks P") {
        env.inject_p = 0.1;
        size_t injected = 0;
        const int trials = 4000;
        for (int t = 0; t < trials; ++t) {
            SimEnv trial_env = env;
            trial_env.rng = Rng(derive_seed(9, 0, t));
            if (trial_env.maybe_inject(0)) ++injected;
        }
        double rate = static_cast<double>(injected) / trials;
        CHECK(rate > 0.08);
        CHECK(rate < 0.12);
    }
}

TEST_CASE("forced situations fire at the requested step") {
    SimEnv env;
    Situation s;
    s.task = "serve_water";
    s.text = "Cup is dirty";
    s.group = 1;
    env.forced = s;
    env.forced_at = 3;
    CHECK_FALSE(env.maybe_inject(0).has_value());
    CHECK_FALSE(env.maybe_inject(2).has_value());
    REQUIRE(env.maybe_inject(3).has_value());
    CHECK_FALSE(env.maybe_inject(4).has_value());
}

TEST_CASE("longer plans meet more situations") {
    // The glass wash runs 12 steps, the plate wash 8; at equal P the longer
    // plan draws more injection chances.
    auto mean_injections = [&](size_t plan_len) {
        size_t injected = 0;
        const int trials = 1000;
        for (int t = 0; t < trials; ++t) {
            SimEnv env;
            env.dataset = &bundle().dataset;
            env.task = "wash_glass";
            env.inject_p = 0.1;
            env.rng = Rng(derive_seed(11, 0, t));
            for (size_t step = 0; step < plan_len; ++step)
                if (env.maybe_inject(step)) ++injected;
        }
        return static_cast<double>(injected) / trials;
    };
    double longer = mean_injections(12);
    double shorter = mean_injections(8);
    CHECK(longer > shorter);
}

TEST_CASE("run_trials with the closed-world oracle and no situations") {
    AlwaysYesOracle cw;
    TrialConfig cfg;
    cfg.task = "Serve water";
    cfg.trials = 40;
    cfg.inject_p = 0.0;
    TrialsResult r = run_trials(bundle(), cfg, cw);
    CHECK(r.metrics.completion_pct() == 100.0);
    CHECK(r.metrics.encountered == 0);
    CHECK_FALSE(r.metrics.handling_pct().has_value());
    CHECK(metrics_table({{"CW", r.metrics}}).find("n/a") != std::string::npos);
}

TEST_CASE("run_trials accounting identities hold") {
    MockOracle mock(bundle().rules);
    TrialConfig cfg;
    cfg.task = "Serve water";
    cfg.trials = 60;
    cfg.seed = 1234;
    TrialsResult r = run_trials(bundle(), cfg, mock);
    CHECK(r.metrics.completed + r.metrics.no_solution + r.metrics.failed ==
          r.metrics.trials);
    CHECK(r.metrics.handled <= r.metrics.encountered);
    for (const auto& rec : r.records) {
        CHECK(rec.handled <= rec.encountered);
        CHECK(rec.encountered <= 1);
    }
    size_t object_encounters = 0;
    for (const auto& [subject, b] : r.metrics.per_object)
        object_encounters += b.encountered;
    CHECK(object_encounters <= r.metrics.encountered);
}

TEST_CASE("run_trials is seed-deterministic and job-count invariant") {
    MockOracle mock(bundle().rules);
    TrialConfig cfg;
    cfg.task = "Wash glass";
    cfg.trials = 30;
    cfg.seed = 77;
    TrialsResult a = run_trials(bundle(), cfg, mock);
    TrialsResult b = run_trials(bundle(), cfg, mock);
    CHECK(to_json(a).dump() == to_json(b).dump());
    cfg.jobs = 3;
    TrialsResult c = run_trials(bundle(), cfg, mock);
    CHECK(to_json(a).dump() == to_json(c).dump());
}

TEST_CASE("always-yes handling is identically zero under situations") {
    AlwaysYesOracle cw;
    TrialConfig cfg;
    cfg.task = "Serve water";
    cfg.trials = 60;
    cfg.inject_p = 0.1;
    TrialsResult r = run_trials(bundle(), cfg, cw);
    CHECK(r.metrics.encountered > 0);
    CHECK(r.metrics.handled == 0);
    CHECK(r.metrics.handling_pct() == 0.0);
}

TEST_CASE("every task fixture plans and completes undisturbed") {
    MockOracle mock(bundle().rules);
    for (const auto& t : bundle().tasks) {
        INFO(t.display);
        TrialConfig cfg;
        cfg.task = t.display;
        cfg.trials = 2;
        cfg.inject_p = 0.0;
        TrialsResult r = run_trials(bundle(), cfg, mock);
        CHECK(r.metrics.completion_pct() == 100.0);
    }
}
