#include "catsim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace catsim {

void MetricsSink::on_alert(const Alert& alert) {
    if (accum_.count(alert.alert_id)) throw std::logic_error("metrics: alert_id reused");
    accum_[alert.alert_id].detection_time = alert.detected_at;
}

void MetricsSink::register_target(int alert_id, int target) {
    const auto it = accum_.find(alert_id);
    if (it == accum_.end()) throw std::logic_error("metrics: target registered for unknown alert");
    it->second.targets.insert(target);
}

void MetricsSink::record_delivery(const DeliveryRecord& rec) {
    const auto it = accum_.find(rec.alert_id);
    if (it == accum_.end()) throw std::logic_error("metrics: delivery for unknown alert");
    Accum& acc = it->second;
    if (!acc.targets.count(rec.target)) throw std::logic_error("metrics: delivery to unregistered target");
    if (acc.delivered.count(rec.target))
        throw std::logic_error("metrics: duplicate (alert_id, target) delivery; engine dedup failed");
    if (rec.delivery_time < rec.detection_time)
        throw std::logic_error("metrics: delivery precedes detection");
    acc.delivered.emplace(rec.target, rec.delivery_time);
    deliveries_.push_back(rec);
}

std::vector<AlertSummary> MetricsSink::summarize() const {
    std::vector<AlertSummary> out;
    out.reserve(accum_.size());
    for (const auto& [id, acc] : accum_) {
        AlertSummary s;
        s.alert_id = id;
        s.detection_time = acc.detection_time;
        s.n_targets = static_cast<int>(acc.targets.size());
        s.n_delivered = static_cast<int>(acc.delivered.size());
        if (s.n_delivered > 0) {
            double mx = -1.0, mn = -1.0, sum = 0.0;
            for (const auto& [target, at] : acc.delivered) {
                const double diff = at - acc.detection_time;
                if (mn < 0.0 || diff < mn) mn = diff;
                if (diff > mx) mx = diff;
                sum += diff;
            }
            s.max_origin_diff = mx;
            s.min_origin_diff = mn;
            s.mean_origin_diff = sum / s.n_delivered;
        }
        out.push_back(s);
    }
    return out;
}

std::vector<SeriesBucket> MetricsSink::series(double bucket_width) const {
    if (!(bucket_width > 0.0)) throw std::invalid_argument("metrics: bucket_width must be > 0");
    std::map<long long, SeriesBucket> buckets;
    for (const AlertSummary& s : summarize()) {
        const long long idx = static_cast<long long>(std::floor(s.detection_time / bucket_width));
        SeriesBucket& b = buckets[idx];
        b.bucket_start = static_cast<double>(idx) * bucket_width;
        b.n_alerts += 1;
        if (s.n_delivered > 0) {
            b.n_summarized += 1;
            b.mean_max_origin_diff += s.max_origin_diff;  // sum for now
        }
    }
    std::vector<SeriesBucket> out;
    out.reserve(buckets.size());
    for (auto& [idx, b] : buckets) {
        if (b.n_summarized > 0) b.mean_max_origin_diff /= b.n_summarized;
        out.push_back(b);
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);  // \n line endings on every platform
    if (!f) throw std::runtime_error("metrics: cannot open for writing: " + p.string());
    return f;
}

}  // namespace

void export_metrics(const MetricsSink& sink, const std::filesystem::path& dir, double bucket_width,
                    const std::string& run_meta_json) {
    std::filesystem::create_directories(dir);
    {
        auto f = open_out(dir / "deliveries.csv");
        f << "alert_id,target,detection_time,delivery_time,hops\n";
        for (const DeliveryRecord& r : sink.deliveries()) {
            f << r.alert_id << ',' << r.target << ',' << format_double(r.detection_time) << ','
              << format_double(r.delivery_time) << ',' << r.hops << '\n';
        }
    }
    {
        auto f = open_out(dir / "summaries.csv");
        f << "alert_id,detection_time,n_targets,n_delivered,max_origin_diff,min_origin_diff,mean_origin_diff\n";
        for (const AlertSummary& s : sink.summarize()) {
            f << s.alert_id << ',' << format_double(s.detection_time) << ',' << s.n_targets << ','
              << s.n_delivered << ',' << format_double(s.max_origin_diff) << ','
              << format_double(s.min_origin_diff) << ',' << format_double(s.mean_origin_diff) << '\n';
        }
    }
    {
        auto f = open_out(dir / "series.csv");
        f << "bucket_start,n_alerts,n_summarized,mean_max_origin_diff\n";
        for (const SeriesBucket& b : sink.series(bucket_width)) {
            f << format_double(b.bucket_start) << ',' << b.n_alerts << ',' << b.n_summarized << ','
              << format_double(b.mean_max_origin_diff) << '\n';
        }
    }
    {
        auto f = open_out(dir / "run_meta.json");
        f << run_meta_json;
        if (run_meta_json.empty() || run_meta_json.back() != '\n') f << '\n';
    }
}

}  // namespace catsim
