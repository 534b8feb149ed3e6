#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ktwin {

// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value (1-based).
// p in (0, 100]; empty input returns 0.
double nearest_rank_percentile(std::vector<double> values, double p);

// %.9g rendering used by every CSV and summary number (stable across runs).
std::string format_num(double v);

struct LatencySample {
    double completion = 0.0;  // when the handler finished, virtual s
    double latency = 0.0;     // completion minus the logical event's first publish
};

// Per-second, per-CloudEvent-type counts of logical events (each event
// counted once, at first publish; dispatcher hops are not new events).
class EventSeries {
public:
    void record(const std::string& type, double time);
    // CSV rows `time,type,count`, time ascending then type.
    std::string to_csv() const;
    // Events per second for each whole-second bucket in [from, to).
    std::vector<double> per_second_totals(double from, double to) const;
    uint64_t total() const { return total_; }
    const std::map<std::string, std::map<int64_t, uint64_t>>& by_type() const { return data_; }

private:
    std::map<std::string, std::map<int64_t, uint64_t>> data_;
    uint64_t total_ = 0;
};

}  // namespace ktwin
