#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "catsim/core_model.hpp"
#include "catsim/dissemination.hpp"
#include "catsim/events.hpp"
#include "catsim/kinematics.hpp"
#include "catsim/metrics.hpp"

namespace catsim {

struct EngineParams {
    double tick{1.0};
    double duration{1000.0};
    bool record_trace{false};  // keep every dispatched event for inspection
};

struct ScheduledRegion {
    double spawn_time{0.0};
    CatRegion region;
};

// Background tower traffic. Each arrival consumes one priority-queue service
// slot at lower priority than CAT alerts and produces no downlinks.
struct BackgroundMessage {
    double arrival_time{0.0};
    int tower{-1};
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

struct SimState {
    // World. Regions move from schedule to active as the clock passes their
    // spawn time; detection only sees active regions.
    Fleet fleet;
    std::vector<AtcTower> towers;
    std::vector<CatRegion> regions;
    std::vector<ScheduledRegion> region_schedule;  // sorted by spawn_time
    Strategy strategy;
    CommsParams comms;
    EngineParams params;

    // Engine.
    double clock{0.0};
    std::uint64_t next_seq{0};
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    MetricsSink metrics;
    std::vector<Event> trace;

    // Bookkeeping.
    struct TowerRuntime {
        std::set<int> seen;  // alert ids accepted; duplicates of these are dropped
        bool busy{false};    // priority server occupied
    };
    struct AlertEntry {
        Alert alert;
        std::optional<CatRegion> region;  // region containing the detection point
    };
    int next_alert_id{0};
    std::size_t next_region{0};  // first not-yet-active entry of region_schedule
    std::map<int, AlertEntry> alerts;
    std::vector<TowerRuntime> tower_rt;
    std::map<int, std::set<int>> direct_sent;        // alert_id -> targets sent to
    std::map<int, std::set<int>> direct_incomplete;  // origin -> alert ids still spreading
    std::set<int> retry_scheduled;                   // origins with a StoreRetry in flight
    std::uint64_t next_tower_msg_seq{0};
    std::uint64_t effective_deliveries{0};  // Delivery dispatches that were not duplicates
    std::map<EventKind, std::uint64_t> dispatch_counts;
};

// Builds the state and seeds the initial events: the first KinematicsTick,
// interval-mode broadcast ticks, and any background traffic arrivals.
SimState make_sim_state(Fleet fleet, std::vector<AtcTower> towers, std::vector<CatRegion> regions,
                        std::vector<ScheduledRegion> region_schedule, Strategy strategy,
                        CommsParams comms, EngineParams params,
                        std::vector<BackgroundMessage> background = {});

// Assigns ev.seq and enqueues. Scheduling into the past is an engine bug.
void schedule(SimState& state, Event ev);

// Dispatches in (time, seq) order until the queue drains or the next event
// lies beyond `duration`. Returns the metrics sink.
const MetricsSink& run(SimState& state, double duration);

}  // namespace catsim
