#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ktwin/broker.hpp"
#include "ktwin/model.hpp"

namespace ktwin {

// Pure scaling law: clamp(ceil(avg / target), min, max). An idle service
// (zero average, empty buffer) sits at min; buffered work always asks for at
// least one replica.
int desired_from(double avg_concurrency, int target, int min_replicas, int max_replicas,
                 uint64_t buffered);

struct ScalerConfig {
    std::string service;
    AutoscalePolicy policy;
    double cpu_per_pod = 0.1;
    uint64_t memory_mib_per_pod = 64;
    // Hard per-replica concurrency limit; 0 = unlimited (the scaling target
    // stays a soft signal, the platform default).
    int container_concurrency = 0;
    double stable_window = 60.0;
    double idle_window = 30.0;
    double cold_start_lo = 1.0;
    double cold_start_hi = 2.0;
};

struct PodReplica {
    uint64_t id = 0;
    enum class State { ColdStarting, Ready } state = State::ColdStarting;
    double started_at = 0.0;
    double ready_at = 0.0;
    int in_flight = 0;
};

struct Placement {
    Envelope work;
    uint64_t replica_id = 0;
};

struct ScalerTrace {
    double time = 0.0;
    int ready = 0;
    int cold_starting = 0;
    uint64_t buffered = 0;
    int desired = 0;
};

// One service's serverless control loop. All mutation happens on event-loop
// entry points; replica creation and termination occur only inside tick()
// (the reconcile step), never as a side effect of admission.
class ServiceScaler {
public:
    ServiceScaler(ScalerConfig cfg, uint64_t seed);

    // Routes work to the least-loaded ready replica with spare capacity, or
    // buffers it. At most one placement results.
    std::vector<Placement> admit(Envelope work, double now);

    // Replica finished cold start: drains buffered work into it (and any
    // other spare capacity, FIFO order).
    std::vector<Placement> on_replica_ready(uint64_t replica_id, double now);

    // A handler finished on this replica: frees capacity and drains.
    std::vector<Placement> on_complete(uint64_t replica_id, double now);

    struct TickResult {
        // (replica id, ready-at time) for replicas entering cold start.
        std::vector<std::pair<uint64_t, double>> created;
        ScalerTrace trace;
    };
    // Scaling tick: sample windowed concurrency, reconcile replica count.
    TickResult tick(double now);

    int desired_now(double now) const;  // window average + idle rule, clamped

    int ready_count() const;
    int cold_count() const;
    int total_pods() const { return static_cast<int>(replicas_.size()); }
    int in_flight_total() const;
    uint64_t buffered() const { return buffer_.size(); }
    bool idle() const { return in_flight_total() == 0 && buffer_.empty(); }
    double cpu_requested() const { return total_pods() * cfg_.cpu_per_pod; }
    double memory_mib_requested() const {
        return static_cast<double>(total_pods()) * static_cast<double>(cfg_.memory_mib_per_pod);
    }
    const ScalerConfig& config() const { return cfg_; }

private:
    ScalerConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<PodReplica> replicas_;
    std::deque<Envelope> buffer_;  // the activator
    std::deque<std::pair<double, double>> window_;  // (time, observed concurrency)
    double last_busy_ = 0.0;
    uint64_t next_replica_id_ = 1;

    PodReplica* find_replica(uint64_t id);
    std::vector<Placement> drain(double now);
    double window_average(double now) const;
};

}  // namespace ktwin
