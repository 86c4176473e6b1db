#include "catsim/sensor.hpp"

#include <cmath>
#include <numeric>

namespace catsim {

double sample_sensor(const Aircraft& ac, std::span<const CatRegion> regions) {
    double value = ac.sensor.baseline;
    for (const CatRegion& r : regions) {
        if (in_region(ac.pos, r)) value += r.intensity;
    }
    return value;
}

std::optional<Alert> detect_cat(const SensorState& s, const Aircraft& ac, double clock, int alert_id) {
    const double deviation = std::abs(s.current - s.average);
    if (deviation < s.threshold) return std::nullopt;
    Alert alert;
    alert.alert_id = alert_id;
    alert.origin = ac.id;
    alert.location = ac.pos;
    alert.detected_at = clock;
    return alert;
}

void update_average(SensorState& s) {
    if (s.mode == AverageMode::Ema) {
        s.average = (1.0 - s.ema_alpha) * s.average + s.ema_alpha * s.current;
        return;
    }
    s.window.push_back(s.current);
    while (static_cast<int>(s.window.size()) > s.window_ticks) s.window.pop_front();
    s.average = std::accumulate(s.window.begin(), s.window.end(), 0.0) / static_cast<double>(s.window.size());
}

}  // namespace catsim
