#include "catsim/dissemination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace catsim {

LatencyBreakdown indirect_latency(const Position3& org, const AtcTower& tower, const Position3& tar,
                                  double overhead, double signal_speed) {
    LatencyBreakdown b;
    b.uplink = propagation_delay(org, tower.pos, signal_speed);
    b.overhead = overhead;
    b.downlink = propagation_delay(tower.pos, tar, signal_speed);
    b.total = b.uplink + b.overhead + b.downlink;
    return b;
}

double atc_overhead(double interval_wait, double priority_wait, double list_creation_time) {
    return interval_wait + priority_wait + list_creation_time;
}

double interval_wait(double arrival, double period) {
    if (!(period > 0.0)) throw std::invalid_argument("interval_wait: period must be > 0");
    if (arrival < 0.0) throw std::invalid_argument("interval_wait: arrival must be >= 0");
    const double phase = std::fmod(arrival, period);
    return period - phase;
}

LatencyBreakdown direct_latency(const Position3& org, const Position3& tar, double channel_estd,
                                double signal_speed) {
    LatencyBreakdown b;
    b.channel_estd = channel_estd;
    b.direct = propagation_delay(org, tar, signal_speed);
    b.total = b.channel_estd + b.direct;
    return b;
}

bool path_intersects_region(const Aircraft& ac, double t, const CatRegion& region) {
    const Position3 p = position_at(ac, t);
    if (in_region(p, region)) return true;
    const Vec3 v = ac.vel;
    const double a = v.x * v.x + v.y * v.y + v.z * v.z;
    if (a == 0.0) return false;
    const Vec3 m = p - region.center;
    const double b = 2.0 * (m.x * v.x + m.y * v.y + m.z * v.z);
    const double c = m.x * m.x + m.y * m.y + m.z * m.z - region.radius * region.radius;
    // Outside the sphere (c > 0): forward intersection needs the ray heading
    // inward (b < 0) and a real root.
    return b < 0.0 && b * b - 4.0 * a * c >= 0.0;
}

namespace {

ChannelState::Phase channel_phase(const std::map<int, ChannelState>& table, int key, double now) {
    const auto it = table.find(key);
    if (it == table.end()) return ChannelState::Phase::Closed;
    return it->second.phase_at(now);
}

double channel_completion(const std::map<int, ChannelState>& table, int key) {
    return table.at(key).completion_time;
}

// Shared by the indirect and multi-tower handlers: both start with an uplink
// to the origin's connected tower.
DetectionOutcome uplink_to_connected_tower(const Alert& alert, const StrategyContext& ctx) {
    DetectionOutcome out;
    const Aircraft& origin = ctx.fleet.aircraft.at(static_cast<std::size_t>(alert.origin));
    if (!origin.connected_tower) {
        out.buffer_on_origin = true;
        return out;
    }
    const int tower_id = *origin.connected_tower;
    double depart = ctx.now;
    switch (channel_phase(origin.tower_channels, tower_id, ctx.now)) {
        case ChannelState::Phase::Open:
            break;
        case ChannelState::Phase::Establishing:
            depart = std::max(ctx.now, channel_completion(origin.tower_channels, tower_id));
            break;
        case ChannelState::Phase::Closed: {
            depart = ctx.now + ctx.comms.atc_channel_estd;
            Event estd;
            estd.time = depart;
            estd.kind = EventKind::ChannelEstablished;
            estd.ac = origin.id;
            estd.tower = tower_id;
            out.events.push_back(estd);
            break;
        }
    }
    Event up;
    up.time = depart;
    up.kind = EventKind::Uplink;
    up.ac = origin.id;
    up.tower = tower_id;
    up.alert_id = alert.alert_id;
    up.hops = 0;
    out.events.push_back(up);
    return out;
}

}  // namespace

DetectionOutcome handle_detection_indirect(const Alert& alert, const StrategyContext& ctx) {
    if (!ctx.strategy.uses_towers() || ctx.strategy.kind == StrategyKind::MultiAtcRelay)
        throw std::logic_error("handle_detection_indirect: wrong strategy kind");
    return uplink_to_connected_tower(alert, ctx);
}

DetectionOutcome handle_detection_multi_atc(const Alert& alert, const StrategyContext& ctx) {
    if (ctx.strategy.kind != StrategyKind::MultiAtcRelay)
        throw std::logic_error("handle_detection_multi_atc: wrong strategy kind");
    return uplink_to_connected_tower(alert, ctx);
}

DetectionOutcome handle_detection_direct(const Alert& alert, const StrategyContext& ctx,
                                         const std::set<int>& already_sent) {
    if (!ctx.strategy.is_direct()) throw std::logic_error("handle_detection_direct: wrong strategy kind");
    DetectionOutcome out;
    const Aircraft& origin = ctx.fleet.aircraft.at(static_cast<std::size_t>(alert.origin));
    const Position3 org_pos = position_at(origin, ctx.now);
    std::size_t reached = already_sent.size();
    for (const Aircraft& target : ctx.fleet.aircraft) {
        if (target.id == origin.id || already_sent.count(target.id)) continue;
        if (ctx.comms.comm_range > 0.0 &&
            distance(org_pos, position_at(target, ctx.now)) > ctx.comms.comm_range)
            continue;
        ++reached;

        double depart = ctx.now;
        switch (ctx.strategy.kind) {
            case StrategyKind::DirectBroadcast:
                break;
            case StrategyKind::DirectOpenConnections:
                depart = ctx.now + ctx.strategy.per_target_overhead;
                break;
            case StrategyKind::DirectOnDemand:
                switch (channel_phase(origin.channels, target.id, ctx.now)) {
                    case ChannelState::Phase::Open:
                        break;
                    case ChannelState::Phase::Establishing:
                        depart = std::max(ctx.now, channel_completion(origin.channels, target.id));
                        break;
                    case ChannelState::Phase::Closed: {
                        depart = ctx.now + ctx.strategy.channel_estd_time;
                        Event estd;
                        estd.time = depart;
                        estd.kind = EventKind::ChannelEstablished;
                        estd.ac = origin.id;
                        estd.target = target.id;
                        out.events.push_back(estd);
                        break;
                    }
                }
                break;
            default:
                throw std::logic_error("handle_detection_direct: wrong strategy kind");
        }

        Event send;
        send.time = depart;
        send.kind = EventKind::DirectSend;
        send.ac = origin.id;
        send.target = target.id;
        send.alert_id = alert.alert_id;
        send.hops = 0;
        out.events.push_back(send);
    }
    out.retry = reached + 1 < ctx.fleet.aircraft.size();
    return out;
}

}  // namespace catsim
