#include "catsim/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "catsim/sensor.hpp"

namespace catsim {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::KinematicsTick: return "KinematicsTick";
        case EventKind::SensorSample: return "SensorSample";
        case EventKind::Uplink: return "Uplink";
        case EventKind::TowerReceive: return "TowerReceive";
        case EventKind::BroadcastTick: return "BroadcastTick";
        case EventKind::QueueService: return "QueueService";
        case EventKind::TowerForward: return "TowerForward";
        case EventKind::Downlink: return "Downlink";
        case EventKind::DirectSend: return "DirectSend";
        case EventKind::ChannelEstablished: return "ChannelEstablished";
        case EventKind::Delivery: return "Delivery";
        case EventKind::Handoff: return "Handoff";
        case EventKind::StoreRetry: return "StoreRetry";
    }
    return "?";
}

void schedule(SimState& state, Event ev) {
    if (ev.time < state.clock) throw std::logic_error("schedule: event scheduled into the past (engine bug)");
    ev.seq = state.next_seq++;
    state.queue.push(ev);
}

namespace {

Aircraft& aircraft_ref(SimState& st, int id) {
    return st.fleet.aircraft.at(static_cast<std::size_t>(id));
}

AtcTower& tower_ref(SimState& st, int id) {
    return st.towers.at(static_cast<std::size_t>(id));
}

// Schedules generator output. A ChannelEstablished event also moves its
// channel to Establishing right now, so later generator calls see it.
void schedule_outcome(SimState& st, const std::vector<Event>& events) {
    for (const Event& ev : events) {
        if (ev.kind == EventKind::ChannelEstablished) {
            ChannelState cs;
            cs.phase = ChannelState::Phase::Establishing;
            cs.completion_time = ev.time;
            Aircraft& org = aircraft_ref(st, ev.ac);
            if (ev.tower >= 0) {
                org.tower_channels[ev.tower] = cs;
            } else {
                org.channels[ev.target] = cs;
            }
        }
        schedule(st, ev);
    }
}

void ensure_retry_scheduled(SimState& st, int origin, double now) {
    if (st.retry_scheduled.count(origin)) return;
    const double t = now + st.params.tick;
    if (t > st.params.duration) return;
    Event ev;
    ev.time = t;
    ev.kind = EventKind::StoreRetry;
    ev.ac = origin;
    schedule(st, ev);
    st.retry_scheduled.insert(origin);
}

// Registers sends from a direct generator pass and tracks spreading progress.
void apply_direct_outcome(SimState& st, int alert_id, int origin, const DetectionOutcome& outcome) {
    std::set<int>& sent = st.direct_sent[alert_id];
    for (const Event& ev : outcome.events) {
        if (ev.kind != EventKind::DirectSend) continue;
        sent.insert(ev.target);
        st.metrics.register_target(alert_id, ev.target);
    }
    schedule_outcome(st, outcome.events);
    if (outcome.retry) {
        st.direct_incomplete[origin].insert(alert_id);
        ensure_retry_scheduled(st, origin, st.clock);
    } else {
        auto it = st.direct_incomplete.find(origin);
        if (it != st.direct_incomplete.end()) it->second.erase(alert_id);
    }
}

void dispatch_detection(SimState& st, const Alert& alert) {
    const StrategyContext ctx{st.fleet, st.towers, st.strategy, st.comms, st.clock};
    if (st.strategy.is_direct()) {
        apply_direct_outcome(st, alert.alert_id, alert.origin,
                             handle_detection_direct(alert, ctx, {}));
        return;
    }
    const DetectionOutcome outcome = st.strategy.kind == StrategyKind::MultiAtcRelay
                                         ? handle_detection_multi_atc(alert, ctx)
                                         : handle_detection_indirect(alert, ctx);
    if (outcome.buffer_on_origin) {
        aircraft_ref(st, alert.origin).stored_alerts.push_back(alert);
        return;
    }
    schedule_outcome(st, outcome.events);
}

void schedule_fanout(SimState& st, const AtcTower& tw, double at, int alert_id, int hops) {
    Event ev;
    ev.time = at;
    ev.kind = EventKind::Downlink;
    ev.tower = tw.id;
    ev.alert_id = alert_id;
    ev.hops = hops;
    schedule(st, ev);
}

void on_kinematics_tick(SimState& st, const Event& ev) {
    advance_to(st.fleet, ev.time);
    while (st.next_region < st.region_schedule.size() &&
           st.region_schedule[st.next_region].spawn_time <= ev.time) {
        st.regions.push_back(st.region_schedule[st.next_region].region);
        ++st.next_region;
    }
    if (!st.towers.empty()) {
        for (const HandoffRecord& h : process_handoffs(st.fleet, st.towers)) {
            Event e;
            e.time = ev.time;
            e.kind = EventKind::Handoff;
            e.ac = h.aircraft;
            e.prev_tower = h.from.value_or(-1);
            e.tower = h.to.value_or(-1);
            schedule(st, e);
        }
    }
    for (const Aircraft& ac : st.fleet.aircraft) {
        Event e;
        e.time = ev.time;
        e.kind = EventKind::SensorSample;
        e.ac = ac.id;
        schedule(st, e);
    }
    if (ev.time + st.params.tick <= st.params.duration) {
        Event e;
        e.time = ev.time + st.params.tick;
        e.kind = EventKind::KinematicsTick;
        schedule(st, e);
    }
}

void on_sensor_sample(SimState& st, const Event& ev) {
    Aircraft& ac = aircraft_ref(st, ev.ac);
    ac.sensor.current = sample_sensor(ac, st.regions);
    const std::optional<Alert> det = detect_cat(ac.sensor, ac, ev.time, st.next_alert_id);
    if (det) {
        ++st.next_alert_id;
        ac.received.insert(det->alert_id);  // the origin never receives its own alert
        SimState::AlertEntry entry;
        entry.alert = *det;
        for (const CatRegion& r : st.regions) {
            if (in_region(det->location, r)) {
                entry.region = r;
                break;
            }
        }
        st.alerts.emplace(det->alert_id, std::move(entry));
        st.metrics.on_alert(*det);
        dispatch_detection(st, *det);
    }
    update_average(ac.sensor);
}

void on_uplink(SimState& st, const Event& ev) {
    const Aircraft& ac = aircraft_ref(st, ev.ac);
    const AtcTower& tw = tower_ref(st, ev.tower);
    Event e;
    e.time = ev.time + propagation_delay(position_at(ac, ev.time), tw.pos, st.comms.signal_speed);
    e.kind = EventKind::TowerReceive;
    e.ac = ev.ac;
    e.tower = ev.tower;
    e.alert_id = ev.alert_id;
    e.hops = ev.hops + 1;
    schedule(st, e);
}

void on_channel_established(SimState& st, const Event& ev) {
    Aircraft& org = aircraft_ref(st, ev.ac);
    ChannelState open;
    open.phase = ChannelState::Phase::Open;
    if (ev.tower >= 0) {
        org.tower_channels[ev.tower] = open;
    } else {
        org.channels[ev.target] = open;
    }
}

void enqueue_tower_message(SimState& st, AtcTower& tw, int priority, double arrival, int alert_id, int hops) {
    QueuedMessage m;
    m.priority = priority;
    m.arrival_seq = st.next_tower_msg_seq++;
    m.arrival_time = arrival;
    m.alert_id = alert_id;
    m.hops = hops;
    const auto pos = std::upper_bound(tw.queue.begin(), tw.queue.end(), m, [](const QueuedMessage& a, const QueuedMessage& b) {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.arrival_seq < b.arrival_seq;
    });
    tw.queue.insert(pos, m);
}

void start_service_if_idle(SimState& st, const AtcTower& tw, double now) {
    SimState::TowerRuntime& rt = st.tower_rt.at(static_cast<std::size_t>(tw.id));
    if (rt.busy) return;
    rt.busy = true;
    Event e;
    e.time = now + tw.service_time;
    e.kind = EventKind::QueueService;
    e.tower = tw.id;
    schedule(st, e);
}

void on_tower_receive(SimState& st, const Event& ev) {
    AtcTower& tw = tower_ref(st, ev.tower);
    SimState::TowerRuntime& rt = st.tower_rt.at(static_cast<std::size_t>(ev.tower));
    if (ev.alert_id < 0) {
        // Background traffic occupies a service slot, nothing else.
        if (tw.mode == TowerMode::PriorityQueue) {
            enqueue_tower_message(st, tw, 1, ev.time, -1, 0);
            start_service_if_idle(st, tw, ev.time);
        }
        return;
    }
    if (st.strategy.kind == StrategyKind::MultiAtcRelay) {
        if (!rt.seen.insert(ev.alert_id).second) return;  // duplicate copy dropped
        schedule_fanout(st, tw, ev.time + tw.list_creation_time, ev.alert_id, ev.hops);
        for (const int link : tw.links) {
            Event e;
            e.time = ev.time;
            e.kind = EventKind::TowerForward;
            e.tower = tw.id;
            e.target = link;
            e.alert_id = ev.alert_id;
            e.hops = ev.hops;
            schedule(st, e);
        }
        return;
    }
    switch (tw.mode) {
        case TowerMode::AlwaysOpen:
            schedule_fanout(st, tw, ev.time + tw.list_creation_time, ev.alert_id, ev.hops);
            break;
        case TowerMode::Interval:
            enqueue_tower_message(st, tw, 0, ev.time, ev.alert_id, ev.hops);
            break;
        case TowerMode::PriorityQueue:
            enqueue_tower_message(st, tw, 0, ev.time, ev.alert_id, ev.hops);
            start_service_if_idle(st, tw, ev.time);
            break;
    }
}

void on_broadcast_tick(SimState& st, const Event& ev) {
    AtcTower& tw = tower_ref(st, ev.tower);
    for (const QueuedMessage& m : tw.queue) {
        schedule_fanout(st, tw, ev.time + tw.list_creation_time, m.alert_id, m.hops);
    }
    tw.queue.clear();
    if (ev.time + tw.broadcast_period <= st.params.duration) {
        Event e;
        e.time = ev.time + tw.broadcast_period;
        e.kind = EventKind::BroadcastTick;
        e.tower = tw.id;
        schedule(st, e);
    }
}

void on_queue_service(SimState& st, const Event& ev) {
    AtcTower& tw = tower_ref(st, ev.tower);
    SimState::TowerRuntime& rt = st.tower_rt.at(static_cast<std::size_t>(ev.tower));
    if (tw.queue.empty()) {
        rt.busy = false;
        return;
    }
    const QueuedMessage m = tw.queue.front();
    tw.queue.erase(tw.queue.begin());
    if (m.alert_id >= 0) schedule_fanout(st, tw, ev.time + tw.list_creation_time, m.alert_id, m.hops);
    if (tw.queue.empty()) {
        rt.busy = false;
    } else {
        Event e;
        e.time = ev.time + tw.service_time;
        e.kind = EventKind::QueueService;
        e.tower = tw.id;
        schedule(st, e);
    }
}

void on_tower_forward(SimState& st, const Event& ev) {
    const AtcTower& src = tower_ref(st, ev.tower);
    const AtcTower& dst = tower_ref(st, ev.target);
    Event e;
    e.time = ev.time + propagation_delay(src.pos, dst.pos, st.comms.signal_speed) +
             st.strategy.inter_tower_processing;
    e.kind = EventKind::TowerReceive;
    e.tower = dst.id;
    e.alert_id = ev.alert_id;
    e.hops = ev.hops + 1;
    schedule(st, e);
}

void on_downlink(SimState& st, const Event& ev) {
    const AtcTower& tw = tower_ref(st, ev.tower);
    const SimState::AlertEntry& entry = st.alerts.at(ev.alert_id);
    const bool filter = st.strategy.kind == StrategyKind::MultiAtcRelay ||
                        (st.strategy.uses_towers() && st.comms.path_filter_indirect);
    for (const Aircraft& ac : st.fleet.aircraft) {
        if (ac.id == entry.alert.origin) continue;
        const Position3 p = position_at(ac, ev.time);
        if (distance(p, tw.pos) > tw.coverage_radius) continue;
        // Exit alerts have no containing region; the filter then passes everyone.
        if (filter && entry.region && !path_intersects_region(ac, ev.time, *entry.region)) continue;
        if (ac.received.count(ev.alert_id)) continue;  // another tower already delivered
        st.metrics.register_target(ev.alert_id, ac.id);
        Event e;
        e.time = signal_arrival_time(tw.pos, ev.time, ac, st.comms.signal_speed);
        e.kind = EventKind::Delivery;
        e.ac = entry.alert.origin;
        e.target = ac.id;
        e.alert_id = ev.alert_id;
        e.hops = ev.hops + 1;
        schedule(st, e);
    }
}

void on_direct_send(SimState& st, const Event& ev) {
    const Aircraft& org = aircraft_ref(st, ev.ac);
    const Aircraft& tar = aircraft_ref(st, ev.target);
    Event e;
    e.time = signal_arrival_time(position_at(org, ev.time), ev.time, tar, st.comms.signal_speed);
    e.kind = EventKind::Delivery;
    e.ac = ev.ac;
    e.target = ev.target;
    e.alert_id = ev.alert_id;
    e.hops = ev.hops + 1;
    schedule(st, e);
}

void on_delivery(SimState& st, const Event& ev) {
    Aircraft& tar = aircraft_ref(st, ev.target);
    if (!tar.received.insert(ev.alert_id).second) return;  // duplicate suppressed
    ++st.effective_deliveries;
    DeliveryRecord rec;
    rec.alert_id = ev.alert_id;
    rec.target = ev.target;
    rec.detection_time = st.alerts.at(ev.alert_id).alert.detected_at;
    rec.delivery_time = ev.time;
    rec.hops = ev.hops;
    st.metrics.record_delivery(rec);
}

void on_handoff(SimState& st, const Event& ev) {
    if (ev.tower < 0) return;  // coverage lost; alerts keep buffering
    Aircraft& ac = aircraft_ref(st, ev.ac);
    if (!st.strategy.uses_towers() || ac.stored_alerts.empty()) return;
    std::vector<Alert> stored;
    stored.swap(ac.stored_alerts);
    const StrategyContext ctx{st.fleet, st.towers, st.strategy, st.comms, st.clock};
    for (const Alert& alert : stored) {
        const DetectionOutcome outcome = st.strategy.kind == StrategyKind::MultiAtcRelay
                                             ? handle_detection_multi_atc(alert, ctx)
                                             : handle_detection_indirect(alert, ctx);
        if (outcome.buffer_on_origin) {
            ac.stored_alerts.push_back(alert);
            continue;
        }
        schedule_outcome(st, outcome.events);
    }
}

void on_store_retry(SimState& st, const Event& ev) {
    st.retry_scheduled.erase(ev.ac);
    const auto it = st.direct_incomplete.find(ev.ac);
    if (it == st.direct_incomplete.end() || it->second.empty()) return;
    const StrategyContext ctx{st.fleet, st.towers, st.strategy, st.comms, st.clock};
    std::set<int> done;
    for (const int alert_id : it->second) {
        const Alert& alert = st.alerts.at(alert_id).alert;
        const DetectionOutcome outcome = handle_detection_direct(alert, ctx, st.direct_sent[alert_id]);
        std::set<int>& sent = st.direct_sent[alert_id];
        for (const Event& e : outcome.events) {
            if (e.kind != EventKind::DirectSend) continue;
            sent.insert(e.target);
            st.metrics.register_target(alert_id, e.target);
        }
        schedule_outcome(st, outcome.events);
        if (!outcome.retry) done.insert(alert_id);
    }
    for (const int id : done) it->second.erase(id);
    if (!it->second.empty()) ensure_retry_scheduled(st, ev.ac, ev.time);
}

void dispatch(SimState& st, const Event& ev) {
    switch (ev.kind) {
        case EventKind::KinematicsTick: on_kinematics_tick(st, ev); break;
        case EventKind::SensorSample: on_sensor_sample(st, ev); break;
        case EventKind::Uplink: on_uplink(st, ev); break;
        case EventKind::TowerReceive: on_tower_receive(st, ev); break;
        case EventKind::BroadcastTick: on_broadcast_tick(st, ev); break;
        case EventKind::QueueService: on_queue_service(st, ev); break;
        case EventKind::TowerForward: on_tower_forward(st, ev); break;
        case EventKind::Downlink: on_downlink(st, ev); break;
        case EventKind::DirectSend: on_direct_send(st, ev); break;
        case EventKind::ChannelEstablished: on_channel_established(st, ev); break;
        case EventKind::Delivery: on_delivery(st, ev); break;
        case EventKind::Handoff: on_handoff(st, ev); break;
        case EventKind::StoreRetry: on_store_retry(st, ev); break;
    }
}

}  // namespace

SimState make_sim_state(Fleet fleet, std::vector<AtcTower> towers, std::vector<CatRegion> regions,
                        std::vector<ScheduledRegion> region_schedule, Strategy strategy,
                        CommsParams comms, EngineParams params,
                        std::vector<BackgroundMessage> background) {
    SimState st;
    st.fleet = std::move(fleet);
    st.towers = std::move(towers);
    st.regions = std::move(regions);
    st.region_schedule = std::move(region_schedule);
    st.strategy = strategy;
    st.comms = comms;
    st.params = params;
    std::stable_sort(st.region_schedule.begin(), st.region_schedule.end(),
                     [](const ScheduledRegion& a, const ScheduledRegion& b) { return a.spawn_time < b.spawn_time; });
    st.tower_rt.resize(st.towers.size());

    // Tower behavior follows the run strategy; per-tower config cannot contradict it.
    for (AtcTower& tw : st.towers) {
        switch (strategy.kind) {
            case StrategyKind::IndirectAlwaysOpen:
            case StrategyKind::MultiAtcRelay:
                tw.mode = TowerMode::AlwaysOpen;
                break;
            case StrategyKind::IndirectInterval:
                tw.mode = TowerMode::Interval;
                tw.broadcast_period = strategy.period;
                break;
            case StrategyKind::IndirectPriority:
                tw.mode = TowerMode::PriorityQueue;
                tw.service_time = strategy.service_time;
                break;
            default:
                break;  // direct runs never consult towers
        }
    }

    Event first;
    first.time = 0.0;
    first.kind = EventKind::KinematicsTick;
    schedule(st, first);
    for (const AtcTower& tw : st.towers) {
        if (tw.mode != TowerMode::Interval) continue;
        Event e;
        e.time = 0.0;
        e.kind = EventKind::BroadcastTick;
        e.tower = tw.id;
        schedule(st, e);
    }
    for (const BackgroundMessage& m : background) {
        Event e;
        e.time = m.arrival_time;
        e.kind = EventKind::TowerReceive;
        e.tower = m.tower;
        e.alert_id = -1;
        schedule(st, e);
    }
    return st;
}

const MetricsSink& run(SimState& state, double duration) {
    while (!state.queue.empty()) {
        const Event ev = state.queue.top();
        if (ev.time > duration) break;
        state.queue.pop();
        state.clock = ev.time;  // monotone: the heap orders by (time, seq)
        if (state.params.record_trace) state.trace.push_back(ev);
        ++state.dispatch_counts[ev.kind];
        dispatch(state, ev);
    }
    return state.metrics;
}

}  // namespace catsim
