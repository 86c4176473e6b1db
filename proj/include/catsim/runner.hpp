#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "catsim/config.hpp"
#include "catsim/engine.hpp"

namespace catsim {

// Everything the engine needs, derived deterministically from (config, seed).
// Draw order: fleet (positions, altitudes, headings), then region spawns
// (arrival gap + host aircraft per region), then background arrivals per
// tower in id order. Spawned regions appear centered on the chosen
// aircraft's position at the spawn instant.
struct World {
    Fleet fleet;
    std::vector<AtcTower> towers;
    std::vector<CatRegion> static_regions;
    std::vector<ScheduledRegion> spawned_regions;
    std::vector<BackgroundMessage> background;
};

World build_world(const ScenarioConfig& cfg, std::uint64_t seed);

struct RunResult {
    MetricsSink metrics;
    std::vector<Event> trace;  // only when requested
    Fleet initial_fleet;       // t = 0 snapshot, usable with position_at for replay
    int separation_violations{0};
    std::uint64_t effective_deliveries{0};
    std::map<EventKind, std::uint64_t> dispatch_counts;
    int n_alerts{0};
};

RunResult run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, bool record_trace = false);

// run_meta document: artifact name/version, effective seed, resolved config
// echo (with the effective seed folded in), and result counts.
std::string build_run_meta(const ScenarioConfig& cfg, std::uint64_t seed, const RunResult& result);

// deliveries.csv, summaries.csv, series.csv, run_meta.json under out_dir.
void write_run_outputs(const ScenarioConfig& cfg, std::uint64_t seed, const RunResult& result,
                       const std::filesystem::path& out_dir);

struct MatrixConfigEntry {
    std::string name;  // labels output dirs and report rows
    ScenarioConfig cfg;
};

struct MatrixReportRow {
    std::string name;
    std::string strategy;
    int runs{0};
    long long alerts{0};           // alerts with at least one delivery, pooled
    double mean_max_origin_diff{0.0};
    double p95_max_origin_diff{0.0};
};

struct MatrixRunError {
    std::string name;
    std::uint64_t seed{0};
    std::string message;
};

struct MatrixResult {
    std::vector<MatrixReportRow> report;  // ranked ascending by mean_max_origin_diff
    std::vector<MatrixRunError> errors;
};

struct PerRunSummaries {
    std::string name;
    std::string strategy;
    std::vector<AlertSummary> summaries;
};

// Pure ranking: pools per-alert max_origin_diff per config across runs.
// p95 is nearest-rank. Rows sort ascending by mean, ties by name.
std::vector<MatrixReportRow> matrix_report(const std::vector<PerRunSummaries>& per_run);

// Runs every (config, seed) pair, writes per-run outputs under
// out_dir/<name>/seed_<seed>/ and report.csv under out_dir (both skipped if
// out_dir is empty). Failed runs land in errors; the report covers the rest.
MatrixResult run_matrix(const std::vector<MatrixConfigEntry>& configs,
                        const std::vector<std::uint64_t>& seeds,
                        const std::filesystem::path& out_dir, int workers = 0);

}  // namespace catsim
