#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ktwin/autoscaler.hpp"
#include "ktwin/broker.hpp"
#include "ktwin/metrics.hpp"
#include "ktwin/scenario.hpp"
#include "ktwin/store.hpp"
#include "ktwin/topology.hpp"

namespace ktwin {

// Service key used for event-store latency/scaling series (the store is a
// platform service, not a twin interface).
inline constexpr const char* kEventStoreService = "event-store";

struct ResourceRow {
    double time = 0.0;
    int pods = 0;
    double cpu_requested = 0.0;
    double memory_mib_requested = 0.0;
    double utilization = 0.0;
};

// Everything a finished run exposes. Identical (seed, config) pairs produce
// bit-identical results.
struct RunResult {
    ScenarioConfig config;
    TopologyPlan plan;

    EventSeries events;  // logical events, counted once at first publish
    std::map<std::string, std::vector<ScalerTrace>> scaling;
    std::map<std::string, std::vector<LatencySample>> latency;
    std::vector<ResourceRow> resources;

    // Resource integrals over [0, duration].
    double cpu_seconds = 0.0;
    double memory_mib_seconds = 0.0;
    double pod_seconds = 0.0;
    int max_pods = 0;
    int final_pods = 0;

    // Conservation ledger.
    BrokerCounters broker;
    uint64_t generated = 0;           // device publish operations
    uint64_t emissions = 0;           // handler emissions published
    uint64_t republished = 0;         // virtual events lowered back to the topic exchange
    uint64_t twin_admissions = 0;     // envelopes admitted to twin services
    uint64_t store_admissions = 0;    // envelopes admitted to the event-store service
    uint64_t handler_runs = 0;        // twin handler completions (including failed)
    uint64_t handler_failures = 0;    // failed twin handler runs
    uint64_t mqtt_dispatcher_drains = 0;
    uint64_t cloudevent_dispatcher_drains = 0;
    uint64_t store_dispatcher_drains = 0;
    uint64_t conversion_failures = 0;  // dispatcher drains dead-lettered mid-flight
    uint64_t store_appends = 0;
    uint64_t store_unknown_instance = 0;
    uint64_t device_receipts = 0;  // virtual events consumed by device subscriptions
    uint64_t unfinished = 0;       // work still queued/buffered/in flight at loop exit

    double end_time = 0.0;  // virtual time at which the loop fully drained
    std::vector<std::string> deadletters;
};

// Runs one scenario to completion. When `store_dir` is non-empty the event
// store streams its segment files there (the CLI passes <out>/store).
RunResult run_scenario(const ScenarioConfig& cfg, const std::string& store_dir = "");

}  // namespace ktwin
