#include "catsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

namespace catsim {

namespace {

// Inversion sampling keeps the draw count at one per arrival.
double exponential_gap(std::mt19937_64& rng, double rate) {
    return -std::log1p(-uniform_unit(rng)) / rate;
}

}  // namespace

World build_world(const ScenarioConfig& cfg, std::uint64_t seed) {
    World w;
    std::mt19937_64 rng(seed);

    WorldConfig wc = cfg.world;
    wc.seed = seed;
    w.fleet = initialize_fleet(wc, rng);

    int tower_id = 0;
    for (const TowerSite& site : cfg.towers) {
        AtcTower tw;
        tw.id = tower_id++;
        tw.pos = {site.x, site.y, 0.0};
        tw.coverage_radius = site.coverage_radius;
        tw.links = site.links;
        tw.list_creation_time = cfg.tower.list_creation_time;
        tw.service_time = cfg.strategy.service_time;
        tw.broadcast_period = cfg.strategy.period;
        w.towers.push_back(tw);
    }

    w.static_regions = cfg.regions.static_regions;
    if (cfg.regions.spawn_rate > 0.0) {
        double t = 0.0;
        for (;;) {
            t += exponential_gap(rng, cfg.regions.spawn_rate);
            if (t > cfg.world.duration) break;
            const auto host = static_cast<std::size_t>(uniform_unit(rng) *
                                                       static_cast<double>(w.fleet.aircraft.size()));
            ScheduledRegion sr;
            sr.spawn_time = t;
            sr.region.center = position_at(w.fleet.aircraft[host], t);
            sr.region.radius = cfg.regions.spawn_radius;
            sr.region.intensity = cfg.regions.spawn_intensity;
            w.spawned_regions.push_back(sr);
        }
    }

    if (cfg.tower.background_rate > 0.0 && cfg.strategy.kind == StrategyKind::IndirectPriority) {
        for (const AtcTower& tw : w.towers) {
            double t = 0.0;
            for (;;) {
                t += exponential_gap(rng, cfg.tower.background_rate);
                if (t > cfg.world.duration) break;
                w.background.push_back({t, tw.id});
            }
        }
    }
    return w;
}

RunResult run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, bool record_trace) {
    World w = build_world(cfg, seed);

    RunResult result;
    result.initial_fleet = w.fleet;
    result.separation_violations = static_cast<int>(check_separation(w.fleet.aircraft).size());

    CommsParams comms;
    comms.signal_speed = cfg.signal_speed;
    comms.atc_channel_estd = cfg.tower.channel_estd_time;
    comms.comm_range = cfg.comm_range;
    comms.path_filter_indirect = cfg.path_filter_indirect;

    EngineParams params;
    params.tick = cfg.world.tick;
    params.duration = cfg.world.duration;
    params.record_trace = record_trace;

    SimState st = make_sim_state(std::move(w.fleet), std::move(w.towers), std::move(w.static_regions),
                                 std::move(w.spawned_regions), cfg.strategy, comms, params,
                                 std::move(w.background));
    run(st, cfg.world.duration);

    result.metrics = std::move(st.metrics);
    result.trace = std::move(st.trace);
    result.effective_deliveries = st.effective_deliveries;
    result.dispatch_counts = std::move(st.dispatch_counts);
    result.n_alerts = st.next_alert_id;
    return result;
}

std::string build_run_meta(const ScenarioConfig& cfg, std::uint64_t seed, const RunResult& result) {
    ScenarioConfig resolved = cfg;
    resolved.world.seed = seed;  // the echo alone reproduces the run
    nlohmann::json j;
    j["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
    j["seed"] = seed;
    j["config"] = config_to_json(resolved);
    j["initial_separation_violations"] = result.separation_violations;
    j["results"] = {{"n_alerts", result.n_alerts},
                    {"n_deliveries", result.effective_deliveries}};
    return j.dump(2);
}

void write_run_outputs(const ScenarioConfig& cfg, std::uint64_t seed, const RunResult& result,
                       const std::filesystem::path& out_dir) {
    export_metrics(result.metrics, out_dir, cfg.metrics.bucket_width,
                   build_run_meta(cfg, seed, result));
}

std::vector<MatrixReportRow> matrix_report(const std::vector<PerRunSummaries>& per_run) {
    struct Pool {
        std::string strategy;
        int runs{0};
        std::vector<double> max_diffs;
    };
    std::map<std::string, Pool> pools;
    for (const PerRunSummaries& r : per_run) {
        Pool& p = pools[r.name];
        p.strategy = r.strategy;
        p.runs += 1;
        for (const AlertSummary& s : r.summaries) {
            if (s.n_delivered > 0) p.max_diffs.push_back(s.max_origin_diff);
        }
    }
    std::vector<MatrixReportRow> rows;
    for (auto& [name, pool] : pools) {
        MatrixReportRow row;
        row.name = name;
        row.strategy = pool.strategy;
        row.runs = pool.runs;
        row.alerts = static_cast<long long>(pool.max_diffs.size());
        if (!pool.max_diffs.empty()) {
            std::sort(pool.max_diffs.begin(), pool.max_diffs.end());
            double sum = 0.0;
            for (const double d : pool.max_diffs) sum += d;
            row.mean_max_origin_diff = sum / static_cast<double>(pool.max_diffs.size());
            const std::size_t rank = static_cast<std::size_t>(
                std::ceil(0.95 * static_cast<double>(pool.max_diffs.size())));
            row.p95_max_origin_diff = pool.max_diffs[std::min(pool.max_diffs.size() - 1, rank == 0 ? 0 : rank - 1)];
        }
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const MatrixReportRow& a, const MatrixReportRow& b) {
        if (a.mean_max_origin_diff != b.mean_max_origin_diff)
            return a.mean_max_origin_diff < b.mean_max_origin_diff;
        return a.name < b.name;
    });
    return rows;
}

MatrixResult run_matrix(const std::vector<MatrixConfigEntry>& configs,
                        const std::vector<std::uint64_t>& seeds,
                        const std::filesystem::path& out_dir, int workers) {
    struct Job {
        const MatrixConfigEntry* entry;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const MatrixConfigEntry& e : configs) {
        for (const std::uint64_t s : seeds) jobs.push_back({&e, s});
    }

    std::vector<PerRunSummaries> per_run(jobs.size());
    std::vector<char> ok(jobs.size(), 0);
    std::mutex errors_mutex;
    MatrixResult result;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            try {
                const RunResult r = run_scenario(job.entry->cfg, job.seed);
                if (!out_dir.empty()) {
                    write_run_outputs(job.entry->cfg, job.seed, r,
                                      out_dir / job.entry->name / ("seed_" + std::to_string(job.seed)));
                }
                per_run[i] = {job.entry->name, strategy_kind_name(job.entry->cfg.strategy.kind),
                              r.metrics.summarize()};
                ok[i] = 1;
            } catch (const std::exception& e) {
                const std::lock_guard<std::mutex> lock(errors_mutex);
                result.errors.push_back({job.entry->name, job.seed, e.what()});
            }
        }
    };

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    n_workers = std::min<int>(n_workers, static_cast<int>(jobs.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    std::vector<PerRunSummaries> completed;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (ok[i]) completed.push_back(std::move(per_run[i]));
    }
    result.report = matrix_report(completed);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir / "report.csv", std::ios::binary);
        if (!f) throw std::runtime_error("matrix: cannot write report.csv under " + out_dir.string());
        f << "rank,name,strategy,runs,alerts,mean_max_origin_diff,p95_max_origin_diff\n";
        int rank = 1;
        for (const MatrixReportRow& row : result.report) {
            f << rank++ << ',' << row.name << ',' << row.strategy << ',' << row.runs << ','
              << row.alerts << ',' << format_double(row.mean_max_origin_diff) << ','
              << format_double(row.p95_max_origin_diff) << '\n';
        }
    }
    return result;
}

}  // namespace catsim
