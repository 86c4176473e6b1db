#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fnmatch.h>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "catsim/config.hpp"
#include "catsim/dissemination.hpp"
#include "catsim/metrics.hpp"
#include "catsim/runner.hpp"

namespace {

using catsim::format_double;
using nlohmann::json;

// Config keys that may be overridden from the command line. Flag names are
// the key paths themselves, e.g. --world.fleet_size 30.
const std::vector<std::string> kOverridableKeys = {
    "world.area_side", "world.fleet_size", "world.aircraft_speed", "world.altitude_min",
    "world.altitude_max", "world.tick", "world.seed", "world.duration", "signal_speed",
    "comm_range", "path_filter_indirect", "sensor.threshold", "sensor.ema_alpha", "sensor.baseline",
    "sensor.average", "sensor.window_ticks", "tower.list_creation_time", "tower.channel_estd_time",
    "tower.background_rate", "regions.spawn_rate", "regions.spawn_radius", "regions.spawn_intensity",
    "strategy.kind", "strategy.period", "strategy.service_time", "strategy.per_target_overhead",
    "strategy.channel_estd_time", "strategy.inter_tower_processing", "metrics.bucket_width",
    "output_dir"};

json parse_scalar(const std::string& raw) {
    try {
        return json::parse(raw);
    } catch (const json::parse_error&) {
        return json(raw);  // bare strings need no quoting on the command line
    }
}

void set_by_path(json& root, const std::string& path, const json& value) {
    json* node = &root;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = path.find('.', start);
        if (dot == std::string::npos) {
            (*node)[path.substr(start)] = value;
            return;
        }
        node = &(*node)[path.substr(start, dot - start)];
        start = dot + 1;
    }
}

json load_json_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw catsim::ConfigError("cannot open config file: " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return json::parse(buf.str());
}

// Loads a config file, honoring run_meta files and CLI overrides.
catsim::ScenarioConfig load_with_overrides(const std::filesystem::path& file,
                                           const std::map<std::string, std::string>& overrides) {
    if (overrides.empty()) return catsim::load_config(file);
    json j = load_json_file(file);
    if (j.is_object() && j.contains("artifact") && j.contains("config")) j = j.at("config");
    for (const auto& [path, raw] : overrides) set_by_path(j, path, parse_scalar(raw));
    return catsim::parse_config(j, file.string());
}

std::vector<std::filesystem::path> expand_config_args(const std::vector<std::string>& args) {
    std::vector<std::filesystem::path> out;
    for (const std::string& arg : args) {
        if (arg.find('*') == std::string::npos && arg.find('?') == std::string::npos) {
            out.emplace_back(arg);
            continue;
        }
        const std::filesystem::path pattern(arg);
        std::filesystem::path dir = pattern.parent_path();
        if (dir.empty()) dir = ".";
        const std::string leaf = pattern.filename().string();
        std::vector<std::filesystem::path> matched;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (fnmatch(leaf.c_str(), name.c_str(), 0) == 0) matched.push_back(entry.path());
        }
        std::sort(matched.begin(), matched.end());
        out.insert(out.end(), matched.begin(), matched.end());
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& raw) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw std::runtime_error("--seeds: need at least one seed");
    return seeds;
}

catsim::Position3 parse_triplet(const std::string& raw, const std::string& flag) {
    catsim::Position3 p;
    std::stringstream ss(raw);
    std::string item;
    double* fields[3] = {&p.x, &p.y, &p.z};
    int i = 0;
    while (std::getline(ss, item, ',') && i < 3) *fields[i++] = std::stod(item);
    if (i != 3) throw std::runtime_error(flag + ": expected x,y,z");
    return p;
}

int cmd_run(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir, const std::map<std::string, std::string>& overrides) {
    catsim::ScenarioConfig cfg = load_with_overrides(config_path, overrides);
    if (out_dir) cfg.output_dir = *out_dir;
    const std::uint64_t effective_seed = seed.value_or(cfg.world.seed);

    const catsim::RunResult result = catsim::run_scenario(cfg, effective_seed);
    catsim::write_run_outputs(cfg, effective_seed, result, cfg.output_dir);

    std::cout << "seed " << effective_seed << ": " << result.n_alerts << " alerts, "
              << result.effective_deliveries << " deliveries, "
              << result.separation_violations << " initial separation violations\n"
              << "outputs: " << cfg.output_dir << "\n";
    return 0;
}

int cmd_matrix(const std::vector<std::string>& config_args, const std::string& seeds_raw,
               const std::string& out_dir, int workers) {
    const std::vector<std::filesystem::path> files = expand_config_args(config_args);
    if (files.empty()) throw std::runtime_error("--configs matched no files");
    const std::vector<std::uint64_t> seeds = parse_seed_list(seeds_raw);

    std::vector<catsim::MatrixConfigEntry> entries;
    std::map<std::string, int> stem_count;
    for (const auto& f : files) {
        std::string name = f.stem().string();
        const int n = ++stem_count[name];
        if (n > 1) name += "_" + std::to_string(n);
        entries.push_back({name, catsim::load_config(f)});
    }

    const catsim::MatrixResult result = catsim::run_matrix(entries, seeds, out_dir, workers);

    std::printf("%-4s %-28s %-24s %5s %7s %14s %14s\n", "rank", "name", "strategy", "runs",
                "alerts", "mean_max_diff", "p95_max_diff");
    int rank = 1;
    for (const catsim::MatrixReportRow& row : result.report) {
        std::printf("%-4d %-28s %-24s %5d %7lld %14s %14s\n", rank++, row.name.c_str(),
                    row.strategy.c_str(), row.runs, row.alerts,
                    format_double(row.mean_max_origin_diff).c_str(),
                    format_double(row.p95_max_origin_diff).c_str());
    }
    for (const catsim::MatrixRunError& err : result.errors) {
        std::cerr << "run failed: " << err.name << " seed " << err.seed << ": " << err.message << "\n";
    }
    if (!out_dir.empty()) std::cout << "report: " << (std::filesystem::path(out_dir) / "report.csv").string() << "\n";
    return result.errors.empty() ? 0 : 1;
}

int cmd_validate(const std::filesystem::path& config_path) {
    const catsim::ScenarioConfig cfg = catsim::load_config(config_path);
    std::cout << config_path.string() << ": OK (" << catsim::strategy_kind_name(cfg.strategy.kind)
              << ", fleet " << cfg.world.fleet_size << ", " << cfg.towers.size() << " towers, "
              << cfg.regions.static_regions.size() << " static regions)\n";
    return 0;
}

int cmd_oracle(const std::string& org_raw, const std::string& tar_raw,
               std::optional<std::string> tower_raw, double overhead,
               std::optional<double> channel_estd, double speed) {
    const catsim::Position3 org = parse_triplet(org_raw, "--org");
    const catsim::Position3 tar = parse_triplet(tar_raw, "--tar");
    if (tower_raw) {
        catsim::AtcTower tower;
        tower.pos = parse_triplet(*tower_raw, "--tower");
        const catsim::LatencyBreakdown b = catsim::indirect_latency(org, tower, tar, overhead, speed);
        std::cout << "indirect: uplink " << format_double(b.uplink) << " + overhead "
                  << format_double(b.overhead) << " + downlink " << format_double(b.downlink)
                  << " = " << format_double(b.total) << " s\n";
    }
    if (!tower_raw || channel_estd) {
        const catsim::LatencyBreakdown b = catsim::direct_latency(org, tar, channel_estd.value_or(0.0), speed);
        std::cout << "direct: channel_estd " << format_double(b.channel_estd) << " + propagation "
                  << format_double(b.direct) << " = " << format_double(b.total) << " s\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clear-air turbulence alert dissemination simulator"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "simulate one scenario and write its outputs");
    std::string run_config;
    run_cmd->add_option("--config", run_config, "scenario config file (or a run_meta.json)")
        ->required();
    std::optional<std::uint64_t> run_seed;
    run_cmd->add_option("--seed", run_seed, "override the config seed");
    std::optional<std::string> run_out;
    run_cmd->add_option("--out", run_out, "output directory (default: config output_dir)");
    std::map<std::string, std::string> overrides;
    for (const std::string& key : kOverridableKeys) {
        run_cmd->add_option_function<std::string>(
            "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
            "override config key " + key);
    }

    // matrix
    auto* matrix_cmd = app.add_subcommand("matrix", "run a config x seed grid and rank strategies");
    std::vector<std::string> matrix_configs;
    matrix_cmd->add_option("--configs", matrix_configs, "config files (globs allowed)")
        ->required()
        ->expected(-1);
    std::string matrix_seeds;
    matrix_cmd->add_option("--seeds", matrix_seeds, "comma-separated seed list")->required();
    std::string matrix_out{"matrix_out"};
    matrix_cmd->add_option("--out", matrix_out, "output directory for per-run files and report.csv");
    int matrix_workers{0};
    matrix_cmd->add_option("--workers", matrix_workers, "worker threads (default: hardware)");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "check a config and exit");
    std::string validate_config;
    validate_cmd->add_option("--config", validate_config, "scenario config file")->required();

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "closed-form latency for one origin/target pair");
    std::string oracle_org, oracle_tar;
    oracle_cmd->add_option("--org", oracle_org, "origin position x,y,z (meters)")->required();
    oracle_cmd->add_option("--tar", oracle_tar, "target position x,y,z (meters)")->required();
    std::optional<std::string> oracle_tower;
    oracle_cmd->add_option("--tower", oracle_tower, "tower position x,y,z; selects the indirect form");
    double oracle_overhead{0.0};
    oracle_cmd->add_option("--overhead", oracle_overhead, "tower overhead seconds (indirect form)");
    std::optional<double> oracle_channel_estd;
    oracle_cmd->add_option("--channel-estd", oracle_channel_estd,
                           "channel establishment seconds (direct form)");
    double oracle_speed{2.99792458e8};
    oracle_cmd->add_option("--speed", oracle_speed, "signal speed m/s");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(run_config, run_seed, run_out, overrides);
        if (matrix_cmd->parsed()) return cmd_matrix(matrix_configs, matrix_seeds, matrix_out, matrix_workers);
        if (validate_cmd->parsed()) return cmd_validate(validate_config);
        if (oracle_cmd->parsed())
            return cmd_oracle(oracle_org, oracle_tar, oracle_tower, oracle_overhead,
                              oracle_channel_estd, oracle_speed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
