#pragma once

#include <cstdint>

namespace catsim {

// One kind per hop or engine action. Dispatch order is (time, seq): seq is
// assigned at scheduling, so same-time events run in scheduling order.
enum class EventKind {
    KinematicsTick,      // advance fleet, handoffs, then one SensorSample per aircraft
    SensorSample,        // sample + detect for one aircraft
    Uplink,              // alert departs origin toward a tower
    TowerReceive,        // alert arrives at a tower
    BroadcastTick,       // interval-mode tower flush
    QueueService,        // priority-mode tower serves one queued message
    TowerForward,        // alert departs one tower toward a linked tower
    Downlink,            // tower builds its target list and sends to every target
    DirectSend,          // alert departs origin toward one aircraft
    ChannelEstablished,  // point-to-point channel becomes Open
    Delivery,            // alert arrives at a target aircraft
    Handoff,             // aircraft changed (or lost/gained) its tower
    StoreRetry,          // buffered direct alert re-attempts sends
};

const char* event_kind_name(EventKind k);

// Flat payload; -1 marks an unused field. `target` is an aircraft id except
// for TowerForward, where it names the destination tower.
struct Event {
    double time{0.0};
    std::uint64_t seq{0};  // assigned by the scheduler
    EventKind kind{EventKind::KinematicsTick};
    int ac{-1};          // acting aircraft: sampler, origin, handoff subject
    int tower{-1};       // tower involved; for Handoff this is the new tower
    int target{-1};      // destination aircraft (or tower for TowerForward)
    int prev_tower{-1};  // Handoff only
    int alert_id{-1};
    int hops{0};  // transmission legs completed before this event
};

}  // namespace catsim
