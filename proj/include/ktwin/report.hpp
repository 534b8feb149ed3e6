#pragma once

#include <string>
#include <vector>

#include "ktwin/engine.hpp"
#include "vendor/json.hpp"

namespace ktwin {

struct ReportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LatencyStats {
    uint64_t count = 0;
    double p50 = 0.0, p90 = 0.0, p95 = 0.0, p99 = 0.0;
    double mean = 0.0, max = 0.0;
};

// Stats over samples whose completion time falls in [from, to).
LatencyStats latency_stats(const std::vector<LatencySample>& samples, double from, double to);

// Deterministic CSV renderings of a run (also the inputs to the run hash).
std::string scaling_csv(const RunResult& result);
std::string latency_csv(const RunResult& result);
std::string resources_csv(const RunResult& result);

// Full run summary including the determinism hash ("runHash"). Two runs of
// the same (scenario, seed) produce byte-identical summaries.
nlohmann::json summarize(const RunResult& result);

// Writes summary.json, topology.json, deadletter.log and metrics/*.csv.
// The event store streams its segments separately (see run_scenario).
void write_run_dir(const RunResult& result, const std::string& dir);

// CLI surfaces over saved run directories.
nlohmann::json load_summary(const std::string& run_dir);
std::string render_report(const nlohmann::json& summary);
std::string render_report_csv(const nlohmann::json& summary);
std::string render_compare(const nlohmann::json& a, const nlohmann::json& b);

}  // namespace ktwin
