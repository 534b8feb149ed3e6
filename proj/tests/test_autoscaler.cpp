#include <string>
#include <vector>

#include "ktwin/autoscaler.hpp"
#include "ktwin/broker.hpp"
#include "vendor/doctest.h"

using namespace ktwin;

namespace {
#include "data/scaler_cases.inc"

Envelope job(uint64_t id) {
    Envelope e;
    e.id = id;
    e.op_seq = id;
    e.kind = EnvelopeKind::CloudEvent;
    e.type = "ktwin.real.test";
    e.source = "t-" + std::to_string(id);
    e.payload = "{}";
    return e;
}

ScalerConfig test_config(int target, int min_replicas, int max_replicas, int cc = 0) {
    ScalerConfig cfg;
    cfg.service = "test";
    cfg.policy = AutoscalePolicy{"concurrency", target, min_replicas, max_replicas};
    cfg.container_concurrency = cc;
    return cfg;
}

// Drives ticks until the scaler converges or `limit` ticks pass.
void run_ticks(ServiceScaler& scaler, double& now, int count, double step = 2.0) {
    for (int i = 0; i < count; ++i) {
        now += step;
        auto result = scaler.tick(now);
        for (const auto& [id, ready_at] : result.created) {
            // Tests advance time past ready_at before the next tick matters.
            (void)id;
            (void)ready_at;
        }
    }
}

}  // namespace

TEST_CASE("desired replica count matches the frozen oracle") {
    for (const auto& c : kScalerCases) {
        CAPTURE(c.avg);
        CAPTURE(c.target);
        CAPTURE(c.buffered);
        CHECK(desired_from(c.avg, c.target, c.lo, c.hi, static_cast<uint64_t>(c.buffered)) ==
              c.want);
    }
}

TEST_CASE("scaler starts converged at min replicas, ready immediately") {
    ServiceScaler at_zero(test_config(5, 0, 18), 1);
    CHECK(at_zero.total_pods() == 0);
    CHECK(at_zero.ready_count() == 0);

    ServiceScaler at_three(test_config(5, 3, 18), 1);
    CHECK(at_three.total_pods() == 3);
    CHECK(at_three.ready_count() == 3);
    CHECK(at_three.cold_count() == 0);
}

TEST_CASE("work admitted with no replicas buffers until a tick creates pods") {
    ServiceScaler scaler(test_config(5, 0, 18), 7);
    auto placed = scaler.admit(job(1), 0.5);
    CHECK(placed.empty());
    CHECK(scaler.buffered() == 1);

    // Reconcile: buffered work forces at least one replica, which cold-starts.
    auto tick = scaler.tick(2.0);
    REQUIRE(tick.created.size() == 1);
    CHECK(scaler.cold_count() == 1);
    CHECK(scaler.buffered() == 1);  // still waiting: pod not ready
    double ready_at = tick.created[0].second;
    CHECK(ready_at >= 3.0);  // cold start takes 1..2 s
    CHECK(ready_at <= 4.0);

    auto placements = scaler.on_replica_ready(tick.created[0].first, ready_at);
    REQUIRE(placements.size() == 1);
    CHECK(placements[0].work.id == 1);
    CHECK(scaler.buffered() == 0);
    CHECK(scaler.in_flight_total() == 1);
}

TEST_CASE("buffered work drains in FIFO order") {
    ServiceScaler scaler(test_config(5, 0, 18), 7);
    for (uint64_t i = 1; i <= 4; ++i) scaler.admit(job(i), 0.1 * static_cast<double>(i));
    auto tick = scaler.tick(2.0);
    REQUIRE(!tick.created.empty());
    auto placements = scaler.on_replica_ready(tick.created[0].first, 4.0);
    REQUIRE(placements.size() == 4);
    for (uint64_t i = 0; i < 4; ++i) CHECK(placements[i].work.id == i + 1);
}

TEST_CASE("hard container concurrency caps per-replica placements") {
    ServiceScaler scaler(test_config(5, 1, 18, /*cc=*/2), 7);
    std::vector<Placement> placed;
    for (uint64_t i = 1; i <= 5; ++i) {
        for (auto& p : scaler.admit(job(i), 1.0)) placed.push_back(p);
    }
    CHECK(placed.size() == 2);  // one ready replica, capacity 2
    CHECK(scaler.buffered() == 3);
    CHECK(scaler.in_flight_total() == 2);

    // Completing one frees a slot and pulls the next buffered item.
    auto more = scaler.on_complete(placed[0].replica_id, 2.0);
    REQUIRE(more.size() == 1);
    CHECK(more[0].work.id == 3);
}

TEST_CASE("unlimited concurrency places everything on the least-loaded replica") {
    ServiceScaler scaler(test_config(5, 2, 18, /*cc=*/0), 7);
    for (uint64_t i = 1; i <= 10; ++i) {
        auto placed = scaler.admit(job(i), 1.0);
        REQUIRE(placed.size() == 1);
    }
    CHECK(scaler.in_flight_total() == 10);
    CHECK(scaler.buffered() == 0);
}

TEST_CASE("scale to zero happens only after the idle window") {
    ServiceScaler scaler(test_config(5, 0, 18), 7);
    scaler.admit(job(1), 1.0);
    auto tick = scaler.tick(2.0);
    REQUIRE(tick.created.size() == 1);
    auto placements = scaler.on_replica_ready(tick.created[0].first, 3.5);
    REQUIRE(placements.size() == 1);
    scaler.on_complete(tick.created[0].first, 4.0);  // now idle

    double now = 4.0;
    // Within the idle window the replica stays (window average keeps it).
    for (int i = 0; i < 10; ++i) {
        now += 2.0;
        scaler.tick(now);
    }
    CHECK(now < 4.0 + 31.0);
    CHECK(scaler.total_pods() == 1);

    // Past the idle window with min=0 the service drops to zero.
    while (now < 4.0 + 32.0) {
        now += 2.0;
        scaler.tick(now);
    }
    CHECK(scaler.total_pods() == 0);
}

TEST_CASE("a min-one service never scales to zero") {
    ServiceScaler scaler(test_config(5, 1, 25), 7);
    double now = 0.0;
    run_ticks(scaler, now, 100);
    CHECK(scaler.total_pods() == 1);
    CHECK(scaler.ready_count() == 1);
}

TEST_CASE("busy replicas are never terminated") {
    // cc=2 spreads six jobs over the first three ready replicas.
    ServiceScaler scaler(test_config(1, 0, 18, /*cc=*/2), 7);
    for (uint64_t i = 1; i <= 6; ++i) scaler.admit(job(i), 0.5);
    auto tick = scaler.tick(2.0);
    REQUIRE(tick.created.size() == 6);  // concurrency 6, target 1
    std::vector<Placement> placed;
    for (const auto& [id, ready_at] : tick.created) {
        (void)ready_at;
        for (auto& p : scaler.on_replica_ready(id, 3.0)) placed.push_back(p);
    }
    REQUIRE(placed.size() == 6);
    CHECK(scaler.in_flight_total() == 6);

    // Free the first replica entirely; two replicas stay busy with 4 jobs.
    scaler.on_complete(placed[0].replica_id, 4.0);
    scaler.on_complete(placed[1].replica_id, 4.0);
    REQUIRE(placed[0].replica_id == placed[1].replica_id);
    CHECK(scaler.in_flight_total() == 4);

    // Window decays to steady concurrency 4 -> desired 4: the two surplus
    // idle replicas go, the busy ones survive untouched.
    double now = 100.0;
    for (int i = 0; i < 40; ++i) {
        scaler.tick(now);
        now += 2.0;
    }
    CHECK(scaler.in_flight_total() == 4);
    CHECK(scaler.total_pods() == 4);
}

TEST_CASE("scale-down cancels cold-starting replicas first") {
    ServiceScaler scaler(test_config(1, 0, 18), 7);
    for (uint64_t i = 1; i <= 8; ++i) scaler.admit(job(i), 0.5);
    auto tick = scaler.tick(2.0);
    REQUIRE(tick.created.size() >= 2);
    // Only the first replica becomes ready; it absorbs all buffered work.
    auto placements = scaler.on_replica_ready(tick.created[0].first, 2.5);
    CHECK(placements.size() == 8);
    for (uint64_t i = 1; i <= 8; ++i) scaler.on_complete(tick.created[0].first, 3.0);

    // Window decays; surplus cold replicas are canceled before ready ones.
    double now = 100.0;
    for (int i = 0; i < 40; ++i) {
        scaler.tick(now);
        now += 2.0;
    }
    CHECK(scaler.total_pods() == 0);
    // Ready events for canceled replicas are ignored, not fatal.
    auto late = scaler.on_replica_ready(tick.created[1].first, now);
    CHECK(late.empty());
    CHECK(scaler.total_pods() == 0);
}

TEST_CASE("fixed provisioning (min == max) holds the replica count constant") {
    ServiceScaler scaler(test_config(5, 4, 4), 7);
    CHECK(scaler.total_pods() == 4);
    double now = 0.0;
    for (int i = 0; i < 50; ++i) {
        if (i % 3 == 0) scaler.admit(job(static_cast<uint64_t>(i) + 1), now + 0.5);
        now += 2.0;
        auto tick = scaler.tick(now);
        CHECK(tick.created.empty());
        CHECK(scaler.total_pods() == 4);
    }
}

TEST_CASE("tick trace reports the observed state") {
    ServiceScaler scaler(test_config(5, 0, 18), 7);
    scaler.admit(job(1), 1.0);
    auto tick = scaler.tick(2.0);
    CHECK(tick.trace.time == 2.0);
    CHECK(tick.trace.buffered == 1);
    CHECK(tick.trace.desired == 1);
    CHECK(tick.trace.cold_starting == 1);
    CHECK(tick.trace.ready == 0);
}

TEST_CASE("resource requests follow the replica count") {
    ServiceScaler scaler(test_config(5, 3, 18), 7);
    CHECK(scaler.cpu_requested() == doctest::Approx(0.3));
    CHECK(scaler.memory_mib_requested() == doctest::Approx(192.0));
}
