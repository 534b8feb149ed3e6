#include "ktwin/autoscaler.hpp"

#include <algorithm>
#include <cmath>

namespace ktwin {

int desired_from(double avg_concurrency, int target, int min_replicas, int max_replicas,
                 uint64_t buffered) {
    if (avg_concurrency <= 0.0 && buffered == 0) return std::max(min_replicas, 0);
    int raw = static_cast<int>(std::ceil(avg_concurrency / target));
    if (buffered > 0 && raw < 1) raw = 1;
    return std::max(min_replicas, std::min(max_replicas, raw));
}

ServiceScaler::ServiceScaler(ScalerConfig cfg, uint64_t seed)
    : cfg_(std::move(cfg)), rng_(seed) {
    // Services start converged at min replicas, already warm.
    for (int i = 0; i < cfg_.policy.min_replicas; ++i) {
        PodReplica pod;
        pod.id = next_replica_id_++;
        pod.state = PodReplica::State::Ready;
        pod.started_at = 0.0;
        pod.ready_at = 0.0;
        replicas_.push_back(pod);
    }
}

PodReplica* ServiceScaler::find_replica(uint64_t id) {
    for (auto& pod : replicas_)
        if (pod.id == id) return &pod;
    return nullptr;
}

int ServiceScaler::ready_count() const {
    return static_cast<int>(std::count_if(replicas_.begin(), replicas_.end(), [](const auto& p) {
        return p.state == PodReplica::State::Ready;
    }));
}

int ServiceScaler::cold_count() const { return total_pods() - ready_count(); }

int ServiceScaler::in_flight_total() const {
    int n = 0;
    for (const auto& pod : replicas_) n += pod.in_flight;
    return n;
}

std::vector<Placement> ServiceScaler::drain(double now) {
    std::vector<Placement> placed;
    while (!buffer_.empty()) {
        PodReplica* best = nullptr;
        for (auto& pod : replicas_) {
            if (pod.state != PodReplica::State::Ready) continue;
            if (cfg_.container_concurrency > 0 && pod.in_flight >= cfg_.container_concurrency)
                continue;
            if (!best || pod.in_flight < best->in_flight) best = &pod;
        }
        if (!best) break;
        best->in_flight++;
        placed.push_back({std::move(buffer_.front()), best->id});
        buffer_.pop_front();
        last_busy_ = now;
    }
    return placed;
}

std::vector<Placement> ServiceScaler::admit(Envelope work, double now) {
    last_busy_ = now;
    buffer_.push_back(std::move(work));
    return drain(now);  // FIFO: never lets new work overtake buffered work
}

std::vector<Placement> ServiceScaler::on_replica_ready(uint64_t replica_id, double now) {
    if (PodReplica* pod = find_replica(replica_id)) {
        pod->state = PodReplica::State::Ready;
        pod->ready_at = now;
    }
    return drain(now);
}

std::vector<Placement> ServiceScaler::on_complete(uint64_t replica_id, double now) {
    if (PodReplica* pod = find_replica(replica_id)) {
        if (pod->in_flight > 0) pod->in_flight--;
        if (in_flight_total() > 0 || !buffer_.empty()) last_busy_ = now;
    }
    return drain(now);
}

double ServiceScaler::window_average(double now) const {
    double sum = 0.0;
    size_t n = 0;
    for (const auto& [t, c] : window_) {
        if (t < now - cfg_.stable_window) continue;
        sum += c;
        n++;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

int ServiceScaler::desired_now(double now) const {
    // Scale-to-zero override: a service idle past the idle window goes to
    // zero even while stale spikes linger in the stable window.
    if (cfg_.policy.min_replicas == 0 && in_flight_total() == 0 && buffer_.empty() &&
        now - last_busy_ >= cfg_.idle_window)
        return 0;
    return desired_from(window_average(now), cfg_.policy.target, cfg_.policy.min_replicas,
                        cfg_.policy.max_replicas, buffer_.size());
}

ServiceScaler::TickResult ServiceScaler::tick(double now) {
    // Observe, then reconcile.
    const double concurrency = static_cast<double>(in_flight_total()) +
                               static_cast<double>(buffer_.size());
    if (concurrency > 0.0) last_busy_ = now;
    window_.emplace_back(now, concurrency);
    while (!window_.empty() && window_.front().first < now - cfg_.stable_window)
        window_.pop_front();

    const int desired = desired_now(now);
    TickResult result;

    while (total_pods() < desired) {
        PodReplica pod;
        pod.id = next_replica_id_++;
        pod.state = PodReplica::State::ColdStarting;
        pod.started_at = now;
        std::uniform_real_distribution<double> cold(cfg_.cold_start_lo, cfg_.cold_start_hi);
        pod.ready_at = now + cold(rng_);
        replicas_.push_back(pod);
        result.created.emplace_back(pod.id, pod.ready_at);
    }

    // Shrink toward desired: cancel cold-starting pods first, then idle ready
    // pods (youngest first); busy pods are never terminated.
    while (total_pods() > desired) {
        auto victim = replicas_.end();
        for (auto it = replicas_.begin(); it != replicas_.end(); ++it) {
            if (it->in_flight > 0) continue;
            if (victim == replicas_.end()) {
                victim = it;
                continue;
            }
            const bool v_cold = victim->state == PodReplica::State::ColdStarting;
            const bool i_cold = it->state == PodReplica::State::ColdStarting;
            if (i_cold != v_cold) {
                if (i_cold) victim = it;  // prefer cancelling cold starts
            } else if (it->id > victim->id) {
                victim = it;  // youngest among equals
            }
        }
        if (victim == replicas_.end()) break;  // everything is busy
        replicas_.erase(victim);
    }

    result.trace = ScalerTrace{now, ready_count(), cold_count(), buffer_.size(), desired};
    return result;
}

}  // namespace ktwin
