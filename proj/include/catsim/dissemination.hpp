#pragma once

#include <set>
#include <span>
#include <vector>

#include "catsim/core_model.hpp"
#include "catsim/events.hpp"
#include "catsim/kinematics.hpp"

namespace catsim {

// How an alert reaches other aircraft. Exactly one kind is active per run;
// only the parameters for that kind are read.
enum class StrategyKind {
    IndirectAlwaysOpen,     // tower downlinks as soon as the target list exists
    IndirectInterval,       // tower flushes pending alerts every `period`
    IndirectPriority,       // tower serves a priority queue, one per `service_time`
    DirectBroadcast,        // origin sends to everyone at once, no overhead
    DirectOpenConnections,  // pre-established per-target links, fixed `per_target_overhead`
    DirectOnDemand,         // per-target channel built on first use, `channel_estd_time`
    MultiAtcRelay,          // tower floods linked towers, each downlinks locally
};

struct Strategy {
    StrategyKind kind{StrategyKind::DirectBroadcast};
    double period{50.0};                  // IndirectInterval
    double service_time{1.0};             // IndirectPriority
    double per_target_overhead{0.01};     // DirectOpenConnections
    double channel_estd_time{0.05};       // DirectOnDemand
    double inter_tower_processing{0.01};  // MultiAtcRelay, per tower-to-tower hop

    bool uses_towers() const {
        return kind == StrategyKind::IndirectAlwaysOpen || kind == StrategyKind::IndirectInterval ||
               kind == StrategyKind::IndirectPriority || kind == StrategyKind::MultiAtcRelay;
    }
    bool is_direct() const { return !uses_towers(); }
};

struct CommsParams {
    double signal_speed{2.99792458e8};  // m/s
    double atc_channel_estd{0.05};      // aircraft-to-tower channel establishment, seconds
    double comm_range{0.0};             // aircraft-to-aircraft reach, meters; 0 = unlimited
    bool path_filter_indirect{false};   // apply the region path filter to single-tower downlinks
};

// Per-target latency decomposition. Indirect totals are uplink + overhead +
// downlink; direct totals are channel_estd + direct.
struct LatencyBreakdown {
    double uplink{0.0};
    double overhead{0.0};
    double downlink{0.0};
    double channel_estd{0.0};
    double direct{0.0};
    double total{0.0};
};

LatencyBreakdown indirect_latency(const Position3& org, const AtcTower& tower, const Position3& tar,
                                  double overhead, double signal_speed);

// Tower overhead between receipt and downlink dispatch. Modes zero the terms
// they don't use: always-open has only list creation, interval adds the wait
// to the next flush, priority adds the queue wait.
double atc_overhead(double interval_wait, double priority_wait, double list_creation_time);

// Wait from `arrival` to the next flush of a broadcast cycle anchored at 0.
// An arrival exactly on a flush instant waits a full period.
double interval_wait(double arrival, double period);

LatencyBreakdown direct_latency(const Position3& org, const Position3& tar, double channel_estd,
                                double signal_speed);

// True if the aircraft is inside the region or its velocity ray will enter it.
bool path_intersects_region(const Aircraft& ac, double t, const CatRegion& region);

// Read-only world view at detection (or retry) time.
struct StrategyContext {
    const Fleet& fleet;
    std::span<const AtcTower> towers;
    const Strategy& strategy;
    const CommsParams& comms;
    double now{0.0};
};

// Generators return events and never mutate the world. The engine applies the
// implied channel transitions: a returned ChannelEstablished event moves its
// channel to Establishing when scheduled and to Open when dispatched.
struct DetectionOutcome {
    std::vector<Event> events;
    bool buffer_on_origin{false};  // origin out of all coverage; store and replay on handoff
    bool retry{false};             // some aircraft unreached; re-check next tick
};

// Uplink toward the origin's connected tower, establishing the tower channel
// first if it is not open.
DetectionOutcome handle_detection_indirect(const Alert& alert, const StrategyContext& ctx);

// Per-target sends for every in-range aircraft not yet sent to.
DetectionOutcome handle_detection_direct(const Alert& alert, const StrategyContext& ctx,
                                         const std::set<int>& already_sent);

// Same uplink as indirect; the relay fan-out happens tower-side.
DetectionOutcome handle_detection_multi_atc(const Alert& alert, const StrategyContext& ctx);

}  // namespace catsim
