#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "catsim/dissemination.hpp"
#include "doctest.h"

using namespace catsim;

namespace {

constexpr double kC = 2.99792458e8;

Aircraft make_aircraft(int id, Position3 pos, Vec3 vel = {0, 0, 0}) {
    Aircraft ac;
    ac.id = id;
    ac.pos = pos;
    ac.pos0 = pos;
    ac.vel = vel;
    return ac;
}

AtcTower make_tower(int id, Position3 pos, double radius) {
    AtcTower tw;
    tw.id = id;
    tw.pos = pos;
    tw.coverage_radius = radius;
    return tw;
}

Alert make_alert(int id, int origin, Position3 where, double when) {
    Alert a;
    a.alert_id = id;
    a.origin = origin;
    a.location = where;
    a.detected_at = when;
    return a;
}

int count_kind(const std::vector<Event>& events, EventKind k) {
    int n = 0;
    for (const Event& e : events) {
        if (e.kind == k) ++n;
    }
    return n;
}

const Event& first_of(const std::vector<Event>& events, EventKind k, int target = -1) {
    for (const Event& e : events) {
        if (e.kind == k && (target < 0 || e.target == target)) return e;
    }
    throw std::runtime_error("expected event kind not generated");
}

}  // namespace

TEST_CASE("relayed latency decomposes into uplink, overhead, downlink") {
    const AtcTower tower = make_tower(0, {0, 0, 0}, 1.0e6);
    const Position3 org{1.0e5, 0, 0};
    const Position3 tar{-5.0e4, 0, 0};

    const LatencyBreakdown plain = indirect_latency(org, tower, tar, 0.0, kC);
    CHECK(plain.total == plain.uplink + plain.overhead + plain.downlink);
    CHECK(plain.total == 1.5e5 / kC);
    CHECK(std::abs(plain.total - 5.0034e-4) < 1.0e-8);

    const LatencyBreakdown waiting = indirect_latency(org, tower, tar, 50.0, kC);
    CHECK(std::abs(waiting.total - 50.00050034) < 1.0e-8);
    CHECK(waiting.uplink == plain.uplink);
    CHECK(waiting.downlink == plain.downlink);
}

TEST_CASE("tower overhead sums its three components") {
    CHECK(atc_overhead(37.2, 0.0, 0.001) == 37.201);
    CHECK(atc_overhead(0.0, 0.0, 0.001) == 0.001);
    CHECK(atc_overhead(0.0, 2.5, 0.01) == 2.51);
}

TEST_CASE("interval wait runs to the next flush of a cycle anchored at zero") {
    CHECK(std::abs(interval_wait(47.00033356, 50.0) - 2.99966644) < 1.0e-9);
    CHECK(interval_wait(0.0, 50.0) == 50.0);
    CHECK(interval_wait(50.0, 50.0) == 50.0);  // an exact hit waits a full cycle
    CHECK(interval_wait(125.0, 50.0) == 25.0);
    CHECK_THROWS_AS(interval_wait(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(interval_wait(-1.0, 50.0), std::invalid_argument);
}

TEST_CASE("direct latency is channel setup plus propagation") {
    const LatencyBreakdown b = direct_latency({0, 0, 0}, {1.0e5, 0, 0}, 0.05, kC);
    CHECK(std::abs(b.total - 0.05033356) < 1.0e-8);
    CHECK(b.channel_estd == 0.05);
    CHECK(b.total == b.channel_estd + b.direct);

    const LatencyBreakdown open = direct_latency({0, 0, 0}, {1.0e5, 0, 0}, 0.0, kC);
    CHECK(open.total == propagation_delay({0, 0, 0}, {1.0e5, 0, 0}, kC));
}

TEST_CASE("a zero-setup direct path never loses to a relayed path") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(-1.0e5, 1.0e5);
    for (int i = 0; i < 200; ++i) {
        const Position3 org{coord(rng), coord(rng), 10000.0};
        const Position3 tar{coord(rng), coord(rng), 11000.0};
        const AtcTower tower = make_tower(0, {coord(rng), coord(rng), 0}, 1.0e6);
        const double overhead = std::abs(coord(rng)) / 1.0e6;
        const double direct = direct_latency(org, tar, 0.0, kC).total;
        const double relayed = indirect_latency(org, tower, tar, overhead, kC).total;
        CHECK(direct <= relayed + 1.0e-15);
    }
}

TEST_CASE("path intersection covers inside, inbound, and outbound cases") {
    const CatRegion region{{1.0e4, 0, 10000}, 500.0, 10.0};

    Aircraft inside = make_aircraft(0, {1.0e4, 100, 10000}, {250, 0, 0});
    CHECK(path_intersects_region(inside, 0.0, region));

    Aircraft inbound = make_aircraft(1, {0, 0, 10000}, {250, 0, 0});
    CHECK(path_intersects_region(inbound, 0.0, region));

    Aircraft outbound = make_aircraft(2, {2.0e4, 0, 10000}, {250, 0, 0});
    CHECK_FALSE(path_intersects_region(outbound, 0.0, region));

    Aircraft offset = make_aircraft(3, {0, 1.0e4, 10000}, {250, 0, 0});  // parallel, 10 km off axis
    CHECK_FALSE(path_intersects_region(offset, 0.0, region));

    Aircraft parked = make_aircraft(4, {0, 0, 10000}, {0, 0, 0});
    CHECK_FALSE(path_intersects_region(parked, 0.0, region));

    // The check evaluates the position at time t: inbound at t = 0, but by
    // t = 100 this aircraft is 15 km past the region and opening distance.
    Aircraft later = make_aircraft(5, {0, 0, 10000}, {250, 0, 0});
    CHECK(path_intersects_region(later, 0.0, region));
    CHECK_FALSE(path_intersects_region(later, 100.0, region));
}

TEST_CASE("broadcast sends to every other aircraft immediately") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {0, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {5.0e4, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(2, {0, 5.0e4, 11000}));
    Strategy strategy;
    strategy.kind = StrategyKind::DirectBroadcast;
    CommsParams comms;
    const std::vector<AtcTower> towers;
    const StrategyContext ctx{fleet, towers, strategy, comms, 12.5};

    const DetectionOutcome out = handle_detection_direct(make_alert(0, 0, {0, 0, 10000}, 12.5), ctx, {});
    CHECK_FALSE(out.buffer_on_origin);
    CHECK_FALSE(out.retry);
    REQUIRE(out.events.size() == 2);
    for (const Event& e : out.events) {
        CHECK(e.kind == EventKind::DirectSend);
        CHECK(e.time == 12.5);
        CHECK(e.ac == 0);
        CHECK(e.alert_id == 0);
    }
    CHECK(out.events[0].target == 1);
    CHECK(out.events[1].target == 2);
}

TEST_CASE("already reached aircraft are not sent to again") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {0, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {5.0e4, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(2, {0, 5.0e4, 11000}));
    Strategy strategy;
    strategy.kind = StrategyKind::DirectBroadcast;
    CommsParams comms;
    const std::vector<AtcTower> towers;
    const StrategyContext ctx{fleet, towers, strategy, comms, 12.5};

    const DetectionOutcome out =
        handle_detection_direct(make_alert(0, 0, {0, 0, 10000}, 12.5), ctx, {1});
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].target == 2);
    CHECK_FALSE(out.retry);
}

TEST_CASE("a finite comm range defers out-of-reach aircraft to a retry") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {0, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {5.0e4, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(2, {3.0e5, 0, 10000}));  // beyond reach
    Strategy strategy;
    strategy.kind = StrategyKind::DirectBroadcast;
    CommsParams comms;
    comms.comm_range = 1.0e5;
    const std::vector<AtcTower> towers;
    const StrategyContext ctx{fleet, towers, strategy, comms, 0.0};

    const DetectionOutcome out = handle_detection_direct(make_alert(0, 0, {0, 0, 10000}, 0.0), ctx, {});
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].target == 1);
    CHECK(out.retry);
}

TEST_CASE("pre-opened connections pay a fixed per-target overhead") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {0, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {5.0e4, 0, 10000}));
    Strategy strategy;
    strategy.kind = StrategyKind::DirectOpenConnections;
    strategy.per_target_overhead = 0.01;
    CommsParams comms;
    const std::vector<AtcTower> towers;
    const StrategyContext ctx{fleet, towers, strategy, comms, 100.0};

    const DetectionOutcome out = handle_detection_direct(make_alert(0, 0, {0, 0, 10000}, 100.0), ctx, {});
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].kind == EventKind::DirectSend);
    CHECK(out.events[0].time == 100.01);
}

TEST_CASE("on-demand channels pay setup once and are free while open") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {0, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {5.0e4, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(2, {0, 5.0e4, 11000}));
    Strategy strategy;
    strategy.kind = StrategyKind::DirectOnDemand;
    strategy.channel_estd_time = 0.05;
    CommsParams comms;
    const std::vector<AtcTower> towers;

    // Fresh channels: each target needs an establishment first.
    const StrategyContext fresh{fleet, towers, strategy, comms, 10.0};
    const DetectionOutcome cold = handle_detection_direct(make_alert(0, 0, {0, 0, 10000}, 10.0), fresh, {});
    CHECK(count_kind(cold.events, EventKind::ChannelEstablished) == 2);
    CHECK(count_kind(cold.events, EventKind::DirectSend) == 2);
    CHECK(first_of(cold.events, EventKind::DirectSend, 1).time == 10.05);
    CHECK(first_of(cold.events, EventKind::ChannelEstablished, 1).time == 10.05);

    // Channel to 1 open, channel to 2 still establishing until 10.08.
    fleet.aircraft[0].channels[1].phase = ChannelState::Phase::Open;
    fleet.aircraft[0].channels[2].phase = ChannelState::Phase::Establishing;
    fleet.aircraft[0].channels[2].completion_time = 10.08;
    const StrategyContext warm{fleet, towers, strategy, comms, 10.06};
    const DetectionOutcome hot = handle_detection_direct(make_alert(1, 0, {0, 0, 10000}, 10.06), warm, {});
    CHECK(count_kind(hot.events, EventKind::ChannelEstablished) == 0);
    CHECK(first_of(hot.events, EventKind::DirectSend, 1).time == 10.06);  // open: no setup
    CHECK(first_of(hot.events, EventKind::DirectSend, 2).time == 10.08);  // waits out the setup
}

TEST_CASE("relayed detection uplinks to the connected tower") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {1.0e4, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {2.0e4, 0, 10000}));
    std::vector<AtcTower> towers;
    towers.push_back(make_tower(0, {0, 0, 0}, 1.0e5));
    Strategy strategy;
    strategy.kind = StrategyKind::IndirectAlwaysOpen;
    CommsParams comms;
    comms.atc_channel_estd = 0.05;

    // No tower connection yet: the alert is buffered aboard.
    const StrategyContext adrift{fleet, towers, strategy, comms, 3.0};
    const DetectionOutcome buffered =
        handle_detection_indirect(make_alert(0, 0, {1.0e4, 0, 10000}, 3.0), adrift);
    CHECK(buffered.buffer_on_origin);
    CHECK(buffered.events.empty());

    // Connected but the uplink channel is closed: setup precedes the uplink.
    fleet.aircraft[0].connected_tower = 0;
    const StrategyContext cold{fleet, towers, strategy, comms, 3.0};
    const DetectionOutcome setup =
        handle_detection_indirect(make_alert(0, 0, {1.0e4, 0, 10000}, 3.0), cold);
    REQUIRE(setup.events.size() == 2);
    CHECK(setup.events[0].kind == EventKind::ChannelEstablished);
    CHECK(setup.events[0].time == 3.05);
    CHECK(setup.events[1].kind == EventKind::Uplink);
    CHECK(setup.events[1].time == 3.05);
    CHECK(setup.events[1].tower == 0);

    // Open channel: the uplink departs immediately.
    fleet.aircraft[0].tower_channels[0].phase = ChannelState::Phase::Open;
    const StrategyContext warm{fleet, towers, strategy, comms, 4.0};
    const DetectionOutcome direct_up =
        handle_detection_indirect(make_alert(1, 0, {1.0e4, 0, 10000}, 4.0), warm);
    REQUIRE(direct_up.events.size() == 1);
    CHECK(direct_up.events[0].kind == EventKind::Uplink);
    CHECK(direct_up.events[0].time == 4.0);
}

TEST_CASE("handlers reject a mismatched strategy kind") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {0, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {100, 0, 10000}));
    const std::vector<AtcTower> towers;
    CommsParams comms;
    const Alert alert = make_alert(0, 0, {0, 0, 10000}, 0.0);

    Strategy direct;
    direct.kind = StrategyKind::DirectBroadcast;
    const StrategyContext dctx{fleet, towers, direct, comms, 0.0};
    CHECK_THROWS_AS(handle_detection_indirect(alert, dctx), std::logic_error);
    CHECK_THROWS_AS(handle_detection_multi_atc(alert, dctx), std::logic_error);

    Strategy relay;
    relay.kind = StrategyKind::MultiAtcRelay;
    const StrategyContext rctx{fleet, towers, relay, comms, 0.0};
    CHECK_THROWS_AS(handle_detection_indirect(alert, rctx), std::logic_error);
    CHECK_THROWS_AS(handle_detection_direct(alert, rctx, {}), std::logic_error);
}

TEST_CASE("multi-tower detection starts with the same uplink") {
    Fleet fleet;
    fleet.aircraft.push_back(make_aircraft(0, {1.0e4, 0, 10000}));
    fleet.aircraft.push_back(make_aircraft(1, {2.0e4, 0, 10000}));
    fleet.aircraft[0].connected_tower = 0;
    fleet.aircraft[0].tower_channels[0].phase = ChannelState::Phase::Open;
    std::vector<AtcTower> towers;
    towers.push_back(make_tower(0, {0, 0, 0}, 1.0e5));
    towers.push_back(make_tower(1, {2.0e5, 0, 0}, 1.0e5));
    towers[0].links = {1};
    Strategy strategy;
    strategy.kind = StrategyKind::MultiAtcRelay;
    CommsParams comms;
    const StrategyContext ctx{fleet, towers, strategy, comms, 6.0};

    const DetectionOutcome out = handle_detection_multi_atc(make_alert(0, 0, {1.0e4, 0, 10000}, 6.0), ctx);
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].kind == EventKind::Uplink);
    CHECK(out.events[0].time == 6.0);
    CHECK(out.events[0].tower == 0);
}
