#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "catsim/core_model.hpp"

namespace catsim {

struct DeliveryRecord {
    int alert_id{-1};
    int target{-1};
    double detection_time{0.0};
    double delivery_time{0.0};
    int hops{0};
};

// Per-alert rollup. origin_diff is delivery_time - detection_time per target;
// the min/max/mean fields are 0 when nothing was delivered.
struct AlertSummary {
    int alert_id{-1};
    double detection_time{0.0};
    int n_targets{0};
    int n_delivered{0};
    double max_origin_diff{0.0};
    double min_origin_diff{0.0};
    double mean_origin_diff{0.0};
};

// One row per detection-time bucket that saw at least one alert. The mean is
// over max_origin_diff of the bucket's alerts that had deliveries.
struct SeriesBucket {
    double bucket_start{0.0};
    int n_alerts{0};
    int n_summarized{0};
    double mean_max_origin_diff{0.0};
};

// Collects alerts, their intended targets, and deliveries. A duplicate
// (alert_id, target) delivery means the engine's dedup failed: fatal.
class MetricsSink {
  public:
    void on_alert(const Alert& alert);
    void register_target(int alert_id, int target);  // idempotent per pair
    void record_delivery(const DeliveryRecord& rec);

    const std::vector<DeliveryRecord>& deliveries() const { return deliveries_; }
    std::size_t n_alerts() const { return accum_.size(); }
    std::vector<AlertSummary> summarize() const;                    // ordered by alert_id
    std::vector<SeriesBucket> series(double bucket_width) const;    // ordered by bucket_start

  private:
    struct Accum {
        double detection_time{0.0};
        std::set<int> targets;
        std::map<int, double> delivered;  // target -> delivery_time
    };
    std::vector<DeliveryRecord> deliveries_;
    std::map<int, Accum> accum_;
};

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Writes deliveries.csv, summaries.csv, series.csv, and run_meta.json (the
// caller supplies the meta document) into dir, creating it if needed.
void export_metrics(const MetricsSink& sink, const std::filesystem::path& dir, double bucket_width,
                    const std::string& run_meta_json);

}  // namespace catsim
