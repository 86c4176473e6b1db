#include "catsim/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace catsim {

double uniform_unit(std::mt19937_64& rng) {
    // Top 53 bits of the draw; identical across platforms for a given seed.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Fleet initialize_fleet(const WorldConfig& cfg, std::mt19937_64& rng) {
    if (cfg.fleet_size < 2) throw std::invalid_argument("initialize_fleet: fleet_size must be >= 2");
    if (!(cfg.area_side > 0.0)) throw std::invalid_argument("initialize_fleet: area_side must be > 0");
    if (cfg.altitude_min < 0.0 || cfg.altitude_max < cfg.altitude_min)
        throw std::invalid_argument("initialize_fleet: altitude band must satisfy 0 <= min <= max");
    if (cfg.aircraft_speed < 0.0) throw std::invalid_argument("initialize_fleet: aircraft_speed must be >= 0");

    Fleet fleet;
    fleet.aircraft.resize(static_cast<std::size_t>(cfg.fleet_size));
    for (int i = 0; i < cfg.fleet_size; ++i) {
        Aircraft& ac = fleet.aircraft[static_cast<std::size_t>(i)];
        ac.id = i;
        ac.pos0.x = uniform_unit(rng) * cfg.area_side;
        ac.pos0.y = uniform_unit(rng) * cfg.area_side;
    }
    for (int i = 0; i < cfg.fleet_size; ++i) {
        Aircraft& ac = fleet.aircraft[static_cast<std::size_t>(i)];
        ac.pos0.z = cfg.altitude_min + uniform_unit(rng) * (cfg.altitude_max - cfg.altitude_min);
    }
    for (int i = 0; i < cfg.fleet_size; ++i) {
        Aircraft& ac = fleet.aircraft[static_cast<std::size_t>(i)];
        const double heading = uniform_unit(rng) * 2.0 * std::numbers::pi;
        // Level flight: headings are horizontal, altitude stays fixed.
        ac.vel = {cfg.aircraft_speed * std::cos(heading), cfg.aircraft_speed * std::sin(heading), 0.0};
        ac.pos = ac.pos0;
    }
    fleet.time = 0.0;
    return fleet;
}

Position3 position_at(const Aircraft& ac, double t) {
    return ac.pos0 + ac.vel * t;
}

double signal_arrival_time(const Position3& from, double sent_at, const Aircraft& target,
                           double signal_speed) {
    if (!(signal_speed > 0.0)) throw std::invalid_argument("signal_arrival_time: speed must be > 0");
    const Vec3 v = target.vel;
    const double vv = v.x * v.x + v.y * v.y + v.z * v.z;
    if (vv == 0.0) return sent_at + propagation_delay(from, position_at(target, sent_at), signal_speed);
    const double cc = signal_speed * signal_speed;
    if (!(cc > vv)) throw std::invalid_argument("signal_arrival_time: target outruns signal");
    const Position3 at_send = position_at(target, sent_at);
    const Vec3 m = {at_send.x - from.x, at_send.y - from.y, at_send.z - from.z};
    const double mv = m.x * v.x + m.y * v.y + m.z * v.z;
    const double mm = m.x * m.x + m.y * m.y + m.z * m.z;
    // Positive root of (cc - vv) tau^2 - 2 (m.v) tau - m.m = 0.
    const double tau = (mv + std::sqrt(mv * mv + (cc - vv) * mm)) / (cc - vv);
    return sent_at + tau;
}

void advance_to(Fleet& fleet, double t) {
    for (Aircraft& ac : fleet.aircraft) ac.pos = position_at(ac, t);
    fleet.time = t;
}

void update_positions(Fleet& fleet, double dt) {
    advance_to(fleet, fleet.time + dt);
}

std::optional<int> nearest_tower(const Aircraft& ac, std::span<const AtcTower> towers) {
    std::optional<int> best;
    double best_dist = 0.0;
    for (const AtcTower& tw : towers) {
        const double d = distance(ac.pos, tw.pos);
        if (d > tw.coverage_radius) continue;
        if (!best || d < best_dist) {
            best = tw.id;
            best_dist = d;
        }
    }
    return best;
}

std::vector<HandoffRecord> process_handoffs(Fleet& fleet, std::span<const AtcTower> towers) {
    std::vector<HandoffRecord> out;
    for (Aircraft& ac : fleet.aircraft) {
        const std::optional<int> now = nearest_tower(ac, towers);
        if (now == ac.connected_tower) continue;
        out.push_back({ac.id, ac.connected_tower, now});
        ac.connected_tower = now;
    }
    return out;
}

}  // namespace catsim
