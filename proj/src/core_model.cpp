#include "catsim/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace catsim {

double distance(const Position3& a, const Position3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double propagation_delay(const Position3& a, const Position3& b, double signal_speed) {
    if (!(signal_speed > 0.0)) throw std::invalid_argument("propagation_delay: signal_speed must be > 0");
    return distance(a, b) / signal_speed;
}

bool in_region(const Position3& p, const CatRegion& r) {
    return distance(p, r.center) <= r.radius;
}

namespace {

double horizontal_speed(const Aircraft& ac) {
    return std::hypot(ac.vel.x, ac.vel.y);
}

bool same_path(const Aircraft& a, const Aircraft& b) {
    const double sa = horizontal_speed(a);
    const double sb = horizontal_speed(b);
    if (sa == 0.0 || sb == 0.0) return false;
    const double dot = (a.vel.x * b.vel.x + a.vel.y * b.vel.y) / (sa * sb);
    const double angle = std::acos(std::clamp(dot, -1.0, 1.0));
    return angle < kSamePathMaxAngleDeg * std::numbers::pi / 180.0;
}

}  // namespace

std::vector<SeparationViolation> check_separation(std::span<const Aircraft> fleet) {
    std::vector<SeparationViolation> out;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        for (std::size_t j = i + 1; j < fleet.size(); ++j) {
            const Aircraft& a = fleet[i];
            const Aircraft& b = fleet[j];
            const double vertical = std::abs(a.pos.z - b.pos.z);
            if (vertical >= kVerticalSeparationM) continue;
            const double dx = a.pos.x - b.pos.x;
            const double dy = a.pos.y - b.pos.y;
            const double lateral = std::hypot(dx, dy);
            if (lateral >= kLateralSeparationM) continue;

            SeparationViolation v;
            v.a = std::min(a.id, b.id);
            v.b = std::max(a.id, b.id);
            v.vertical_gap = vertical;
            v.lateral_gap = lateral;
            if (same_path(a, b)) {
                // Displacement projected onto the pair's mean heading.
                double hx = a.vel.x / horizontal_speed(a) + b.vel.x / horizontal_speed(b);
                double hy = a.vel.y / horizontal_speed(a) + b.vel.y / horizontal_speed(b);
                const double hn = std::hypot(hx, hy);
                double along = 0.0;
                if (hn > 0.0) along = std::abs(dx * (hx / hn) + dy * (hy / hn));
                const double slower = std::min(horizontal_speed(a), horizontal_speed(b));
                if (along >= kAlongTrackSeparationS * slower) continue;
                v.along_track_gap = along;
            }
            out.push_back(v);
        }
    }
    return out;
}

}  // namespace catsim
