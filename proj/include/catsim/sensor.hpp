#pragma once

#include <optional>
#include <span>

#include "catsim/core_model.hpp"

namespace catsim {

// Instantaneous sensor reading at the aircraft's current position: baseline
// plus the intensity of every region containing it.
double sample_sensor(const Aircraft& ac, std::span<const CatRegion> regions);

// Alert check against the pre-update average (the sample from this tick must
// not have been folded in yet). |current - average| == threshold alerts.
// The returned alert carries alert_id; the caller owns id allocation.
std::optional<Alert> detect_cat(const SensorState& s, const Aircraft& ac, double clock, int alert_id);

// Folds s.current into the running average (EMA or sliding window). Call once
// per tick, after detect_cat.
void update_average(SensorState& s);

}  // namespace catsim
