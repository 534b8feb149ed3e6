#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ktwin/model.hpp"

namespace ktwin {

// Inter-publish interval for one device interface, virtual seconds.
// lo == hi means a fixed interval (the generator applies ±jitter);
// lo < hi is a ranged interval narrowed per window (slow ends, fast middle).
struct IntervalSpec {
    double lo = 0.0;
    double hi = 0.0;
    bool fixed() const { return lo == hi; }
};

struct ProvisioningMode {
    enum class Kind { Auto, Fixed } kind = Kind::Auto;
    int fixed_per_service = 0;  // replicas held per twin service
    int fixed_store = 0;        // replicas held for the event store
};

struct ScenarioConfig {
    std::string name = "city";
    int neighborhoods = 1;
    double duration = 1440.0;       // 6 windows x 240 s (24 h compressed to 24 min)
    double window_seconds = 240.0;  // one 4 h day segment
    double compression = 60.0;      // informational: virtual seconds per real hour
    uint64_t seed = 1;
    ProvisioningMode provisioning;

    // Workload shape.
    std::map<std::string, IntervalSpec> intervals;  // interface -> base interval
    double jitter = 0.10;       // relative jitter on fixed intervals
    double boot_window = 2.0;   // first publish uniform over [0, boot_window)

    // Service model.
    double handler_median_ms = 5.0;  // twin handler service time, lognormal median
    double handler_sigma = 0.5;
    double store_median_s = 1.5;  // event-store append service time, lognormal median
    double store_sigma = 0.25;
    double dispatcher_rate = 350.0;  // envelopes per virtual second, per dispatcher

    // Autoscaler model.
    double scaling_tick = 2.0;
    double stable_window = 60.0;
    double idle_window = 30.0;
    double cold_start_lo = 1.0;
    double cold_start_hi = 2.0;
    AutoscalePolicy twin_policy{"concurrency", 5, 0, 18};
    bool twin_policy_set = false;  // true when a file overrides the per-interface policy
    AutoscalePolicy store_policy{"concurrency", 5, 1, 25};
    int container_concurrency = 0;  // 0 = unlimited
    double cpu_per_pod = 0.1;
    uint64_t memory_mib_per_pod = 64;

    // Handler knobs.
    double battery_threshold = 20.0;
    double aqi_window = 60.0;
    double pressure_window = 180.0;

    int window_count() const { return static_cast<int>(duration / window_seconds + 0.5); }
};

// The Smart City defaults (all intervals from the evaluation workload).
ScenarioConfig default_scenario();

// Loads a scenario YAML file over the defaults; unknown fields are errors.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<input>");

}  // namespace ktwin
