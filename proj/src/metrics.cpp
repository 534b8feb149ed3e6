#include "ktwin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ktwin {

double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * n));
    if (rank < 1) rank = 1;
    if (rank > values.size()) rank = values.size();
    return values[rank - 1];
}

std::string format_num(double v) {
    char buf[40];
    snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void EventSeries::record(const std::string& type, double time) {
    data_[type][static_cast<int64_t>(std::floor(time))]++;
    total_++;
}

std::string EventSeries::to_csv() const {
    // Gather (second, type, count) and emit time-major for plottability.
    std::map<int64_t, std::map<std::string, uint64_t>> rows;
    for (const auto& [type, buckets] : data_)
        for (const auto& [sec, count] : buckets) rows[sec][type] = count;
    std::ostringstream os;
    os << "time,type,count\n";
    for (const auto& [sec, types] : rows)
        for (const auto& [type, count] : types)
            os << sec << "," << type << "," << count << "\n";
    return os.str();
}

std::vector<double> EventSeries::per_second_totals(double from, double to) const {
    const int64_t lo = static_cast<int64_t>(std::floor(from));
    const int64_t hi = static_cast<int64_t>(std::ceil(to));
    if (hi <= lo) return {};
    std::vector<double> totals(static_cast<size_t>(hi - lo), 0.0);
    for (const auto& [_, buckets] : data_)
        for (const auto& [sec, count] : buckets)
            if (sec >= lo && sec < hi) totals[static_cast<size_t>(sec - lo)] += static_cast<double>(count);
    return totals;
}

}  // namespace ktwin
