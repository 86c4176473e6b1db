#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "catsim/core_model.hpp"

namespace catsim {

struct WorldConfig {
    double area_side{1.0e5};       // square start area, meters per side
    int fleet_size{20};            // >= 2
    double aircraft_speed{250.0};  // m/s, horizontal
    double altitude_min{9000.0};
    double altitude_max{12000.0};
    double tick{1.0};       // engine step, seconds
    std::uint64_t seed{1};
    double duration{1000.0};
};

// Fleet positions are a pure function of time: pos = pos0 + vel * time.
// `time` is the instant the cached `pos` fields correspond to.
struct Fleet {
    std::vector<Aircraft> aircraft;
    double time{0.0};
};

// Uniform draw in [0, 1) from the run's generator. All seeded randomness in
// the simulator goes through this so replays are exact.
double uniform_unit(std::mt19937_64& rng);

// Draw order: x,y per aircraft in id order, then altitudes in id order, then
// headings in id order. Changing this breaks replay compatibility.
Fleet initialize_fleet(const WorldConfig& cfg, std::mt19937_64& rng);

Position3 position_at(const Aircraft& ac, double t);

// Arrival time at a moving aircraft of a signal emitted at sent_at from a
// fixed point: solves |target(t) - from| = signal_speed * (t - sent_at).
// Requires signal_speed > |target velocity|.
double signal_arrival_time(const Position3& from, double sent_at, const Aircraft& target,
                           double signal_speed);

void advance_to(Fleet& fleet, double t);

// dt-based stepping on top of advance_to, so repeated half steps land on the
// same positions as one full step whenever the time sums are exact.
void update_positions(Fleet& fleet, double dt);

// Nearest tower whose coverage contains the aircraft; nullopt outside all
// coverage. Ties break toward the lower tower id.
std::optional<int> nearest_tower(const Aircraft& ac, std::span<const AtcTower> towers);

struct HandoffRecord {
    int aircraft{-1};
    std::optional<int> from;
    std::optional<int> to;
};

// Reassociates every aircraft with its nearest covering tower and returns one
// record per change. connected_tower matches nearest_tower on return.
std::vector<HandoffRecord> process_handoffs(Fleet& fleet, std::span<const AtcTower> towers);

}  // namespace catsim
