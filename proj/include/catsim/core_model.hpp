#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace catsim {

// Meters for positions, meters/second for velocities, seconds for times.
struct Vec3 {
    double x{0.0};
    double y{0.0};
    double z{0.0};
};

using Position3 = Vec3;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

double distance(const Position3& a, const Position3& b);

// Line-of-sight signal delay. speed must be > 0.
double propagation_delay(const Position3& a, const Position3& b, double signal_speed);

// Spherical turbulence region. Boundary counts as inside.
struct CatRegion {
    Position3 center;
    double radius{0.0};
    double intensity{0.0};  // sensor units added while inside
};

bool in_region(const Position3& p, const CatRegion& r);

// Turbulence sensor: alert when |current - average| reaches threshold.
// The average is an EMA by default; a sliding window mean is selectable.
enum class AverageMode { Ema, Window };

struct SensorState {
    double current{0.0};
    double average{0.0};
    double threshold{4.0};
    double ema_alpha{0.125};
    double baseline{0.0};
    AverageMode mode{AverageMode::Ema};
    int window_ticks{8};
    std::deque<double> window;  // Window mode only; most recent sample at the back
};

struct Alert {
    int alert_id{-1};  // unique across a run, assigned in detection order
    int origin{-1};
    Position3 location;      // origin position at detection
    double detected_at{0.0};
};

// Point-to-point comm channel lifecycle. A channel in Establishing whose
// completion time has passed behaves as Open.
struct ChannelState {
    enum class Phase { Closed, Establishing, Open };
    Phase phase{Phase::Closed};
    double completion_time{0.0};  // meaningful only while Establishing

    Phase phase_at(double now) const {
        if (phase == Phase::Establishing && now >= completion_time) return Phase::Open;
        return phase;
    }
};

enum class TowerMode { AlwaysOpen, Interval, PriorityQueue };

// Pending message at a tower. alert_id < 0 marks background traffic that
// consumes a service slot but produces no downlinks.
struct QueuedMessage {
    int priority{0};  // smaller value serves first
    std::uint64_t arrival_seq{0};
    double arrival_time{0.0};
    int alert_id{-1};
    int hops{0};
};

struct AtcTower {
    int id{-1};
    Position3 pos;  // ground station, z = 0
    double coverage_radius{0.0};
    TowerMode mode{TowerMode::AlwaysOpen};
    std::vector<QueuedMessage> queue;  // kept ordered by (priority, arrival_seq)
    std::vector<int> links;            // ids of directly connected towers
    double list_creation_time{0.001};
    double service_time{1.0};
    double broadcast_period{50.0};
};

struct Aircraft {
    int id{-1};
    Position3 pos;   // current position, kept equal to pos0 + vel * fleet time
    Position3 pos0;  // position at t = 0
    Vec3 vel;
    SensorState sensor;
    std::set<int> received;                       // alert ids delivered to this aircraft
    std::map<int, ChannelState> channels;         // peer aircraft id -> channel
    std::map<int, ChannelState> tower_channels;   // tower id -> uplink channel
    std::optional<int> connected_tower;
    std::vector<Alert> stored_alerts;  // buffered while out of every tower's coverage
};

// Separation minima: 1000 ft vertical, 50 mi lateral, 10 min along-track.
inline constexpr double kVerticalSeparationM = 304.8;
inline constexpr double kLateralSeparationM = 80467.2;
inline constexpr double kAlongTrackSeparationS = 600.0;
inline constexpr double kSamePathMaxAngleDeg = 5.0;

struct SeparationViolation {
    int a{-1};
    int b{-1};  // a < b
    double vertical_gap{0.0};
    double lateral_gap{0.0};
    std::optional<double> along_track_gap;  // set only for same-path pairs
};

// A pair is separated if any one minimum holds. The along-track rule applies
// only to pairs on the same path (heading gap < 5 deg, both moving) and uses
// the slower aircraft's horizontal speed for the 10-minute distance.
std::vector<SeparationViolation> check_separation(std::span<const Aircraft> fleet);

}  // namespace catsim
