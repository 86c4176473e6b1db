#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "catsim/runner.hpp"
#include "doctest.h"

using namespace catsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

ScenarioConfig spawning_config() {
    ScenarioConfig cfg;
    cfg.world.fleet_size = 6;
    cfg.world.duration = 200.0;
    cfg.regions.spawn_rate = 0.05;
    cfg.strategy.kind = StrategyKind::DirectBroadcast;
    return cfg;
}

}  // namespace

TEST_CASE("world building is a pure function of config and seed") {
    const ScenarioConfig cfg = spawning_config();
    const World a = build_world(cfg, 42);
    const World b = build_world(cfg, 42);
    const World c = build_world(cfg, 43);

    REQUIRE(a.fleet.aircraft.size() == b.fleet.aircraft.size());
    for (std::size_t i = 0; i < a.fleet.aircraft.size(); ++i) {
        CHECK(a.fleet.aircraft[i].pos0.x == b.fleet.aircraft[i].pos0.x);
        CHECK(a.fleet.aircraft[i].vel.x == b.fleet.aircraft[i].vel.x);
    }
    REQUIRE(a.spawned_regions.size() == b.spawned_regions.size());
    for (std::size_t i = 0; i < a.spawned_regions.size(); ++i) {
        CHECK(a.spawned_regions[i].spawn_time == b.spawned_regions[i].spawn_time);
        CHECK(a.spawned_regions[i].region.center.x == b.spawned_regions[i].region.center.x);
    }
    bool differs = a.spawned_regions.size() != c.spawned_regions.size();
    for (std::size_t i = 0; i < a.fleet.aircraft.size(); ++i) {
        if (a.fleet.aircraft[i].pos0.x != c.fleet.aircraft[i].pos0.x) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("spawned regions arrive in order and ride the fleet") {
    ScenarioConfig cfg = spawning_config();
    cfg.regions.spawn_radius = 3000.0;
    cfg.regions.spawn_intensity = 8.0;
    const World w = build_world(cfg, 7);
    REQUIRE(!w.spawned_regions.empty());
    double prev = 0.0;
    for (const ScheduledRegion& sr : w.spawned_regions) {
        CHECK(sr.spawn_time >= prev);
        CHECK(sr.spawn_time <= cfg.world.duration);
        CHECK(sr.region.radius == 3000.0);
        CHECK(sr.region.intensity == 8.0);
        // Centered on some aircraft's position at the spawn instant.
        bool on_some_aircraft = false;
        for (const Aircraft& ac : w.fleet.aircraft) {
            const Position3 p = position_at(ac, sr.spawn_time);
            if (p.x == sr.region.center.x && p.y == sr.region.center.y &&
                p.z == sr.region.center.z)
                on_some_aircraft = true;
        }
        CHECK(on_some_aircraft);
        prev = sr.spawn_time;
    }
}

TEST_CASE("towers inherit run-wide timing") {
    ScenarioConfig cfg;
    cfg.strategy.kind = StrategyKind::IndirectInterval;
    cfg.strategy.period = 25.0;
    cfg.tower.list_creation_time = 0.004;
    cfg.towers.push_back({100.0, 200.0, 5.0e4, {}});
    const World w = build_world(cfg, 1);
    REQUIRE(w.towers.size() == 1);
    CHECK(w.towers[0].id == 0);
    CHECK(w.towers[0].pos.x == 100.0);
    CHECK(w.towers[0].pos.z == 0.0);
    CHECK(w.towers[0].list_creation_time == 0.004);
    CHECK(w.towers[0].broadcast_period == 25.0);
}

TEST_CASE("background traffic only exists for priority towers") {
    ScenarioConfig cfg;
    cfg.tower.background_rate = 0.5;
    cfg.towers.push_back({0.0, 0.0, 5.0e4, {}});
    cfg.strategy.kind = StrategyKind::IndirectPriority;
    const World with = build_world(cfg, 3);
    CHECK(!with.background.empty());
    for (const BackgroundMessage& m : with.background) {
        CHECK(m.tower == 0);
        CHECK(m.arrival_time <= cfg.world.duration);
    }
    cfg.strategy.kind = StrategyKind::IndirectAlwaysOpen;
    const World without = build_world(cfg, 3);
    CHECK(without.background.empty());
}

TEST_CASE("a run with spawned turbulence alerts and delivers deterministically") {
    const ScenarioConfig cfg = spawning_config();
    const RunResult a = run_scenario(cfg, 1);
    const RunResult b = run_scenario(cfg, 1);

    CHECK(a.n_alerts >= 1);
    CHECK(!a.metrics.deliveries().empty());
    CHECK(a.n_alerts == b.n_alerts);
    REQUIRE(a.metrics.deliveries().size() == b.metrics.deliveries().size());
    for (std::size_t i = 0; i < a.metrics.deliveries().size(); ++i) {
        CHECK(a.metrics.deliveries()[i].alert_id == b.metrics.deliveries()[i].alert_id);
        CHECK(a.metrics.deliveries()[i].target == b.metrics.deliveries()[i].target);
        CHECK(a.metrics.deliveries()[i].delivery_time == b.metrics.deliveries()[i].delivery_time);
    }
    for (const DeliveryRecord& rec : a.metrics.deliveries()) {
        CHECK(rec.delivery_time >= rec.detection_time);
    }
    CHECK(a.initial_fleet.aircraft.size() == 6);
    CHECK(a.initial_fleet.time == 0.0);
}

TEST_CASE("a dense low fleet violates every pairwise separation") {
    ScenarioConfig cfg;
    cfg.world.fleet_size = 4;
    cfg.world.area_side = 1.0e4;       // all lateral gaps far below the minimum
    cfg.world.altitude_min = 10000.0;  // all at one flight level
    cfg.world.altitude_max = 10000.0;
    cfg.world.duration = 1.0;
    const RunResult r = run_scenario(cfg, 5);
    CHECK(r.separation_violations == 6);  // C(4,2)
}

TEST_CASE("run metadata reproduces the run") {
    const ScenarioConfig cfg = spawning_config();
    const RunResult r = run_scenario(cfg, 9);
    const std::string meta = build_run_meta(cfg, 9, r);

    const auto j = nlohmann::json::parse(meta);
    CHECK(j.at("artifact").at("name") == kArtifactName);
    CHECK(j.at("artifact").at("version") == kArtifactVersion);
    CHECK(j.at("seed") == 9);
    CHECK(j.at("config").at("world").at("seed") == 9);
    CHECK(j.at("results").at("n_alerts") == r.n_alerts);
    CHECK(j.at("initial_separation_violations") == r.separation_violations);

    // Loading the metadata file back yields the resolved config.
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "catsim_runner_meta";
    std::filesystem::remove_all(dir);
    write_run_outputs(cfg, 9, r, dir);
    const ScenarioConfig replay = load_config(dir / "run_meta.json");
    CHECK(replay.world.seed == 9);
    ScenarioConfig resolved = cfg;
    resolved.world.seed = 9;
    CHECK(config_to_json(replay) == config_to_json(resolved));

    // A replayed run matches the original outputs byte for byte.
    const RunResult again = run_scenario(replay, replay.world.seed);
    const std::filesystem::path dir2 = dir / "replay";
    write_run_outputs(replay, replay.world.seed, again, dir2);
    CHECK(slurp(dir / "deliveries.csv") == slurp(dir2 / "deliveries.csv"));
    CHECK(slurp(dir / "summaries.csv") == slurp(dir2 / "summaries.csv"));
    CHECK(slurp(dir / "series.csv") == slurp(dir2 / "series.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("the matrix report pools, ranks, and takes nearest-rank p95") {
    std::vector<PerRunSummaries> per_run;

    PerRunSummaries a1{"slow", "indirect_interval", {}};
    AlertSummary s;
    s.alert_id = 0;
    s.n_targets = 2;
    s.n_delivered = 1;
    s.max_origin_diff = 1.0;
    a1.summaries.push_back(s);
    s.alert_id = 1;
    s.max_origin_diff = 3.0;
    a1.summaries.push_back(s);
    s.alert_id = 2;
    s.n_delivered = 0;  // never delivered: excluded from the pool
    s.max_origin_diff = 99.0;
    a1.summaries.push_back(s);
    per_run.push_back(a1);

    PerRunSummaries a2{"slow", "indirect_interval", {}};
    s.n_delivered = 1;
    s.alert_id = 0;
    s.max_origin_diff = 2.0;
    a2.summaries.push_back(s);
    per_run.push_back(a2);

    PerRunSummaries b1{"fast", "direct_broadcast", {}};
    s.alert_id = 0;
    s.max_origin_diff = 0.5;
    b1.summaries.push_back(s);
    per_run.push_back(b1);

    const auto rows = matrix_report(per_run);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].name == "fast");
    CHECK(rows[0].runs == 1);
    CHECK(rows[0].alerts == 1);
    CHECK(rows[0].mean_max_origin_diff == 0.5);
    CHECK(rows[0].p95_max_origin_diff == 0.5);
    CHECK(rows[1].name == "slow");
    CHECK(rows[1].runs == 2);
    CHECK(rows[1].alerts == 3);
    CHECK(rows[1].mean_max_origin_diff == 2.0);
    CHECK(rows[1].p95_max_origin_diff == 3.0);  // nearest rank of {1, 2, 3}

    // Pure: a second call over the same input gives the same rows.
    const auto rows2 = matrix_report(per_run);
    CHECK(rows2.size() == rows.size());
    CHECK(rows2[0].name == rows[0].name);
    CHECK(rows2[1].mean_max_origin_diff == rows[1].mean_max_origin_diff);
}

TEST_CASE("an empty pool reports zeros") {
    PerRunSummaries empty{"quiet", "direct_broadcast", {}};
    const auto rows = matrix_report({empty});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].alerts == 0);
    CHECK(rows[0].mean_max_origin_diff == 0.0);
    CHECK(rows[0].p95_max_origin_diff == 0.0);
}

TEST_CASE("a one-cell matrix agrees with a direct run") {
    const ScenarioConfig cfg = spawning_config();
    const MatrixResult m = run_matrix({{"only", cfg}}, {1}, "");
    CHECK(m.errors.empty());
    REQUIRE(m.report.size() == 1);

    const RunResult direct = run_scenario(cfg, 1);
    double sum = 0.0;
    long long n = 0;
    for (const AlertSummary& s : direct.metrics.summarize()) {
        if (s.n_delivered > 0) {
            sum += s.max_origin_diff;
            ++n;
        }
    }
    REQUIRE(n > 0);
    CHECK(m.report[0].alerts == n);
    CHECK(m.report[0].mean_max_origin_diff == doctest::Approx(sum / static_cast<double>(n)).epsilon(1.0e-12));
}

TEST_CASE("the matrix writes one directory per cell plus a ranked report") {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "catsim_matrix_test";
    std::filesystem::remove_all(dir);

    ScenarioConfig fast = spawning_config();
    ScenarioConfig lagged = spawning_config();
    lagged.strategy.kind = StrategyKind::DirectOnDemand;
    lagged.strategy.channel_estd_time = 0.25;

    const MatrixResult m =
        run_matrix({{"fast", fast}, {"lagged", lagged}}, {1, 2}, dir, 2);
    CHECK(m.errors.empty());
    REQUIRE(m.report.size() == 2);
    CHECK(m.report[0].name == "fast");  // no setup cost ranks first
    CHECK(m.report[0].runs == 2);

    CHECK(std::filesystem::exists(dir / "fast" / "seed_1" / "deliveries.csv"));
    CHECK(std::filesystem::exists(dir / "fast" / "seed_2" / "run_meta.json"));
    CHECK(std::filesystem::exists(dir / "lagged" / "seed_1" / "summaries.csv"));
    const std::string report = slurp(dir / "report.csv");
    CHECK(report.rfind("rank,name,strategy,runs,alerts,mean_max_origin_diff,p95_max_origin_diff\n",
                       0) == 0);
    CHECK(report.find("1,fast,direct_broadcast,2,") != std::string::npos);
    CHECK(report.find("2,lagged,direct_on_demand,2,") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("matrix runs that fail are reported, not fatal") {
    ScenarioConfig good = spawning_config();
    ScenarioConfig bad = spawning_config();
    bad.world.fleet_size = 1;  // initialize_fleet rejects this
    const MatrixResult m = run_matrix({{"good", good}, {"bad", bad}}, {1}, "");
    REQUIRE(m.errors.size() == 1);
    CHECK(m.errors[0].name == "bad");
    REQUIRE(m.report.size() == 1);
    CHECK(m.report[0].name == "good");
}
