#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "catsim/core_model.hpp"
#include "catsim/dissemination.hpp"
#include "catsim/kinematics.hpp"

namespace catsim {

inline constexpr const char* kArtifactName = "catsim";
inline constexpr const char* kArtifactVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SensorConfig {
    double threshold{4.0};
    double ema_alpha{0.125};
    double baseline{0.0};
    AverageMode average{AverageMode::Ema};
    int window_ticks{8};
};

struct TowerSite {
    double x{0.0};
    double y{0.0};
    double coverage_radius{0.0};
    std::vector<int> links;
};

// Shared tower timing; per-run, not per-tower.
struct TowerDefaults {
    double list_creation_time{0.001};
    double channel_estd_time{0.05};  // aircraft-to-tower uplink establishment
    double background_rate{0.0};     // Poisson arrivals per second per tower
};

struct RegionConfig {
    std::vector<CatRegion> static_regions;
    double spawn_rate{0.0};  // Poisson regions per second; 0 disables spawning
    double spawn_radius{5000.0};
    double spawn_intensity{10.0};
};

struct MetricsConfig {
    double bucket_width{10.0};
};

struct ScenarioConfig {
    WorldConfig world;
    double signal_speed{2.99792458e8};
    double comm_range{0.0};  // 0 = unlimited aircraft-to-aircraft reach
    bool path_filter_indirect{false};
    SensorConfig sensor;
    std::vector<TowerSite> towers;
    TowerDefaults tower;
    RegionConfig regions;
    Strategy strategy;
    MetricsConfig metrics;
    std::string output_dir{"out"};
};

const char* strategy_kind_name(StrategyKind kind);
StrategyKind strategy_kind_from_name(const std::string& name);

// Strict parse: unknown keys, type mismatches, and range violations are
// ConfigErrors naming the offending key path. `source` labels messages.
ScenarioConfig parse_config(const nlohmann::json& j, const std::string& source);

// Reads a config file, or a run_meta.json written by a previous run (its
// embedded resolved config is loaded, reproducing that run).
ScenarioConfig load_config(const std::filesystem::path& file);

// Full resolved echo; parse_config(config_to_json(c)) round-trips exactly.
nlohmann::json config_to_json(const ScenarioConfig& c);

}  // namespace catsim
