#include "catsim/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

namespace catsim {

using nlohmann::json;

const char* strategy_kind_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::IndirectAlwaysOpen: return "indirect_always_open";
        case StrategyKind::IndirectInterval: return "indirect_interval";
        case StrategyKind::IndirectPriority: return "indirect_priority";
        case StrategyKind::DirectBroadcast: return "direct_broadcast";
        case StrategyKind::DirectOpenConnections: return "direct_open_connections";
        case StrategyKind::DirectOnDemand: return "direct_on_demand";
        case StrategyKind::MultiAtcRelay: return "multi_atc_relay";
    }
    return "?";
}

StrategyKind strategy_kind_from_name(const std::string& name) {
    for (const StrategyKind k :
         {StrategyKind::IndirectAlwaysOpen, StrategyKind::IndirectInterval, StrategyKind::IndirectPriority,
          StrategyKind::DirectBroadcast, StrategyKind::DirectOpenConnections, StrategyKind::DirectOnDemand,
          StrategyKind::MultiAtcRelay}) {
        if (name == strategy_kind_name(k)) return k;
    }
    throw ConfigError("unknown strategy kind: " + name);
}

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& path, const std::string& what) {
    throw ConfigError(source + ": " + path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void require_object(const json& v, const std::string& source, const std::string& path) {
    if (!v.is_object()) fail(source, path, "must be an object");
}

void reject_unknown_keys(const json& obj, const std::string& source, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(source, join(path, it.key()), "unknown key");
    }
}

double read_double(const json& obj, const std::string& source, const std::string& path,
                   const char* key, double def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(source, join(path, key), "must be a number");
    return v.get<double>();
}

int read_int(const json& obj, const std::string& source, const std::string& path, const char* key,
             int def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(source, join(path, key), "must be an integer");
    return v.get<int>();
}

std::uint64_t read_u64(const json& obj, const std::string& source, const std::string& path,
                       const char* key, std::uint64_t def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        fail(source, join(path, key), "must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool read_bool(const json& obj, const std::string& source, const std::string& path, const char* key,
               bool def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(source, join(path, key), "must be a boolean");
    return v.get<bool>();
}

std::string read_string(const json& obj, const std::string& source, const std::string& path,
                        const char* key, const std::string& def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(source, join(path, key), "must be a string");
    return v.get<std::string>();
}

void check(bool ok, const std::string& source, const std::string& path, const std::string& what) {
    if (!ok) fail(source, path, what);
}

}  // namespace

ScenarioConfig parse_config(const json& j, const std::string& source) {
    require_object(j, source, "(top level)");
    reject_unknown_keys(j, source, "",
                        {"world", "signal_speed", "comm_range", "path_filter_indirect", "sensor",
                         "towers", "tower", "regions", "strategy", "metrics", "output_dir"});
    ScenarioConfig c;

    if (j.contains("world")) {
        const json& w = j.at("world");
        require_object(w, source, "world");
        reject_unknown_keys(w, source, "world",
                            {"area_side", "fleet_size", "aircraft_speed", "altitude_min",
                             "altitude_max", "tick", "seed", "duration"});
        c.world.area_side = read_double(w, source, "world", "area_side", c.world.area_side);
        c.world.fleet_size = read_int(w, source, "world", "fleet_size", c.world.fleet_size);
        c.world.aircraft_speed = read_double(w, source, "world", "aircraft_speed", c.world.aircraft_speed);
        c.world.altitude_min = read_double(w, source, "world", "altitude_min", c.world.altitude_min);
        c.world.altitude_max = read_double(w, source, "world", "altitude_max", c.world.altitude_max);
        c.world.tick = read_double(w, source, "world", "tick", c.world.tick);
        c.world.seed = read_u64(w, source, "world", "seed", c.world.seed);
        c.world.duration = read_double(w, source, "world", "duration", c.world.duration);
    }
    check(c.world.area_side > 0.0, source, "world.area_side", "must be > 0");
    check(c.world.fleet_size >= 2, source, "world.fleet_size", "must be >= 2");
    check(c.world.aircraft_speed >= 0.0, source, "world.aircraft_speed", "must be >= 0");
    check(c.world.altitude_min >= 0.0, source, "world.altitude_min", "must be >= 0");
    check(c.world.altitude_max >= c.world.altitude_min, source, "world.altitude_max", "must be >= altitude_min");
    check(c.world.tick > 0.0, source, "world.tick", "must be > 0");
    check(c.world.duration >= 0.0, source, "world.duration", "must be >= 0");

    c.signal_speed = read_double(j, source, "", "signal_speed", c.signal_speed);
    check(c.signal_speed > 0.0, source, "signal_speed", "must be > 0");
    check(c.signal_speed > c.world.aircraft_speed, source, "signal_speed",
          "must exceed world.aircraft_speed");
    c.comm_range = read_double(j, source, "", "comm_range", c.comm_range);
    check(c.comm_range >= 0.0, source, "comm_range", "must be >= 0 (0 = unlimited)");
    c.path_filter_indirect = read_bool(j, source, "", "path_filter_indirect", c.path_filter_indirect);

    if (j.contains("sensor")) {
        const json& s = j.at("sensor");
        require_object(s, source, "sensor");
        reject_unknown_keys(s, source, "sensor",
                            {"threshold", "ema_alpha", "baseline", "average", "window_ticks"});
        c.sensor.threshold = read_double(s, source, "sensor", "threshold", c.sensor.threshold);
        c.sensor.ema_alpha = read_double(s, source, "sensor", "ema_alpha", c.sensor.ema_alpha);
        c.sensor.baseline = read_double(s, source, "sensor", "baseline", c.sensor.baseline);
        const std::string avg = read_string(s, source, "sensor", "average", "ema");
        if (avg == "ema") {
            c.sensor.average = AverageMode::Ema;
        } else if (avg == "window") {
            c.sensor.average = AverageMode::Window;
        } else {
            fail(source, "sensor.average", "must be \"ema\" or \"window\"");
        }
        c.sensor.window_ticks = read_int(s, source, "sensor", "window_ticks", c.sensor.window_ticks);
    }
    check(c.sensor.threshold > 0.0, source, "sensor.threshold", "must be > 0");
    check(c.sensor.ema_alpha > 0.0 && c.sensor.ema_alpha <= 1.0, source, "sensor.ema_alpha",
          "must be in (0, 1]");
    check(c.sensor.window_ticks >= 1, source, "sensor.window_ticks", "must be >= 1");

    if (j.contains("towers")) {
        const json& ts = j.at("towers");
        if (!ts.is_array()) fail(source, "towers", "must be an array");
        int idx = 0;
        for (const json& t : ts) {
            const std::string path = "towers[" + std::to_string(idx) + "]";
            require_object(t, source, path);
            reject_unknown_keys(t, source, path, {"x", "y", "coverage_radius", "links"});
            TowerSite site;
            site.x = read_double(t, source, path, "x", 0.0);
            site.y = read_double(t, source, path, "y", 0.0);
            site.coverage_radius = read_double(t, source, path, "coverage_radius", 0.0);
            check(site.coverage_radius > 0.0, source, path + ".coverage_radius", "must be > 0");
            if (t.contains("links")) {
                const json& ls = t.at("links");
                if (!ls.is_array()) fail(source, path + ".links", "must be an array");
                for (const json& l : ls) {
                    if (!l.is_number_integer()) fail(source, path + ".links", "must hold integers");
                    site.links.push_back(l.get<int>());
                }
            }
            c.towers.push_back(site);
            ++idx;
        }
        const int n = static_cast<int>(c.towers.size());
        for (int i = 0; i < n; ++i) {
            const std::string path = "towers[" + std::to_string(i) + "].links";
            std::set<int> seen;
            for (const int l : c.towers[static_cast<std::size_t>(i)].links) {
                check(l >= 0 && l < n, source, path, "link out of range");
                check(l != i, source, path, "tower linked to itself");
                check(seen.insert(l).second, source, path, "duplicate link");
            }
        }
    }

    if (j.contains("tower")) {
        const json& t = j.at("tower");
        require_object(t, source, "tower");
        reject_unknown_keys(t, source, "tower",
                            {"list_creation_time", "channel_estd_time", "background_rate"});
        c.tower.list_creation_time = read_double(t, source, "tower", "list_creation_time", c.tower.list_creation_time);
        c.tower.channel_estd_time = read_double(t, source, "tower", "channel_estd_time", c.tower.channel_estd_time);
        c.tower.background_rate = read_double(t, source, "tower", "background_rate", c.tower.background_rate);
    }
    check(c.tower.list_creation_time >= 0.0, source, "tower.list_creation_time", "must be >= 0");
    check(c.tower.channel_estd_time >= 0.0, source, "tower.channel_estd_time", "must be >= 0");
    check(c.tower.background_rate >= 0.0, source, "tower.background_rate", "must be >= 0");

    if (j.contains("regions")) {
        const json& r = j.at("regions");
        require_object(r, source, "regions");
        reject_unknown_keys(r, source, "regions",
                            {"static", "spawn_rate", "spawn_radius", "spawn_intensity"});
        if (r.contains("static")) {
            const json& arr = r.at("static");
            if (!arr.is_array()) fail(source, "regions.static", "must be an array");
            int idx = 0;
            for (const json& reg : arr) {
                const std::string path = "regions.static[" + std::to_string(idx) + "]";
                require_object(reg, source, path);
                reject_unknown_keys(reg, source, path, {"x", "y", "z", "radius", "intensity"});
                CatRegion cr;
                cr.center.x = read_double(reg, source, path, "x", 0.0);
                cr.center.y = read_double(reg, source, path, "y", 0.0);
                cr.center.z = read_double(reg, source, path, "z", 0.0);
                cr.radius = read_double(reg, source, path, "radius", 0.0);
                cr.intensity = read_double(reg, source, path, "intensity", 0.0);
                check(cr.radius > 0.0, source, path + ".radius", "must be > 0");
                check(cr.intensity >= 0.0, source, path + ".intensity", "must be >= 0");
                c.regions.static_regions.push_back(cr);
                ++idx;
            }
        }
        c.regions.spawn_rate = read_double(r, source, "regions", "spawn_rate", c.regions.spawn_rate);
        c.regions.spawn_radius = read_double(r, source, "regions", "spawn_radius", c.regions.spawn_radius);
        c.regions.spawn_intensity = read_double(r, source, "regions", "spawn_intensity", c.regions.spawn_intensity);
    }
    check(c.regions.spawn_rate >= 0.0, source, "regions.spawn_rate", "must be >= 0");
    check(c.regions.spawn_radius > 0.0, source, "regions.spawn_radius", "must be > 0");
    check(c.regions.spawn_intensity >= 0.0, source, "regions.spawn_intensity", "must be >= 0");

    if (j.contains("strategy")) {
        const json& s = j.at("strategy");
        require_object(s, source, "strategy");
        reject_unknown_keys(s, source, "strategy",
                            {"kind", "period", "service_time", "per_target_overhead",
                             "channel_estd_time", "inter_tower_processing"});
        const std::string kind = read_string(s, source, "strategy", "kind",
                                             strategy_kind_name(c.strategy.kind));
        try {
            c.strategy.kind = strategy_kind_from_name(kind);
        } catch (const ConfigError&) {
            fail(source, "strategy.kind", "unknown strategy \"" + kind + "\"");
        }
        c.strategy.period = read_double(s, source, "strategy", "period", c.strategy.period);
        c.strategy.service_time = read_double(s, source, "strategy", "service_time", c.strategy.service_time);
        c.strategy.per_target_overhead =
            read_double(s, source, "strategy", "per_target_overhead", c.strategy.per_target_overhead);
        c.strategy.channel_estd_time =
            read_double(s, source, "strategy", "channel_estd_time", c.strategy.channel_estd_time);
        c.strategy.inter_tower_processing =
            read_double(s, source, "strategy", "inter_tower_processing", c.strategy.inter_tower_processing);
    }
    check(c.strategy.period > 0.0, source, "strategy.period", "must be > 0");
    check(c.strategy.service_time > 0.0, source, "strategy.service_time", "must be > 0");
    check(c.strategy.per_target_overhead >= 0.0, source, "strategy.per_target_overhead", "must be >= 0");
    check(c.strategy.channel_estd_time >= 0.0, source, "strategy.channel_estd_time", "must be >= 0");
    check(c.strategy.inter_tower_processing >= 0.0, source, "strategy.inter_tower_processing",
          "must be >= 0");

    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        require_object(m, source, "metrics");
        reject_unknown_keys(m, source, "metrics", {"bucket_width"});
        c.metrics.bucket_width = read_double(m, source, "metrics", "bucket_width", c.metrics.bucket_width);
    }
    check(c.metrics.bucket_width > 0.0, source, "metrics.bucket_width", "must be > 0");

    c.output_dir = read_string(j, source, "", "output_dir", c.output_dir);

    const bool single_tower_strategy = c.strategy.uses_towers() &&
                                       c.strategy.kind != StrategyKind::MultiAtcRelay;
    if (single_tower_strategy)
        check(c.towers.size() == 1, source, "towers",
              "strategy \"" + std::string(strategy_kind_name(c.strategy.kind)) +
                  "\" needs exactly one tower");
    if (c.strategy.kind == StrategyKind::MultiAtcRelay)
        check(!c.towers.empty(), source, "towers", "multi_atc_relay needs at least one tower");

    return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t upto = e.byte < text.size() ? e.byte : text.size();
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ConfigError(file.string() + ":" + std::to_string(line) + ": " + e.what());
    }

    // A run_meta.json round-trips: its embedded resolved config is the run.
    if (j.is_object() && j.contains("artifact") && j.contains("config"))
        return parse_config(j.at("config"), file.string() + " (embedded config)");
    return parse_config(j, file.string());
}

nlohmann::json config_to_json(const ScenarioConfig& c) {
    json j;
    j["world"] = {{"area_side", c.world.area_side},
                  {"fleet_size", c.world.fleet_size},
                  {"aircraft_speed", c.world.aircraft_speed},
                  {"altitude_min", c.world.altitude_min},
                  {"altitude_max", c.world.altitude_max},
                  {"tick", c.world.tick},
                  {"seed", c.world.seed},
                  {"duration", c.world.duration}};
    j["signal_speed"] = c.signal_speed;
    j["comm_range"] = c.comm_range;
    j["path_filter_indirect"] = c.path_filter_indirect;
    j["sensor"] = {{"threshold", c.sensor.threshold},
                   {"ema_alpha", c.sensor.ema_alpha},
                   {"baseline", c.sensor.baseline},
                   {"average", c.sensor.average == AverageMode::Ema ? "ema" : "window"},
                   {"window_ticks", c.sensor.window_ticks}};
    j["towers"] = json::array();
    for (const TowerSite& t : c.towers) {
        j["towers"].push_back(
            {{"x", t.x}, {"y", t.y}, {"coverage_radius", t.coverage_radius}, {"links", t.links}});
    }
    j["tower"] = {{"list_creation_time", c.tower.list_creation_time},
                  {"channel_estd_time", c.tower.channel_estd_time},
                  {"background_rate", c.tower.background_rate}};
    j["regions"] = {{"static", json::array()},
                    {"spawn_rate", c.regions.spawn_rate},
                    {"spawn_radius", c.regions.spawn_radius},
                    {"spawn_intensity", c.regions.spawn_intensity}};
    for (const CatRegion& r : c.regions.static_regions) {
        j["regions"]["static"].push_back({{"x", r.center.x},
                                          {"y", r.center.y},
                                          {"z", r.center.z},
                                          {"radius", r.radius},
                                          {"intensity", r.intensity}});
    }
    j["strategy"] = {{"kind", strategy_kind_name(c.strategy.kind)},
                     {"period", c.strategy.period},
                     {"service_time", c.strategy.service_time},
                     {"per_target_overhead", c.strategy.per_target_overhead},
                     {"channel_estd_time", c.strategy.channel_estd_time},
                     {"inter_tower_processing", c.strategy.inter_tower_processing}};
    j["metrics"] = {{"bucket_width", c.metrics.bucket_width}};
    j["output_dir"] = c.output_dir;
    return j;
}

}  // namespace catsim
