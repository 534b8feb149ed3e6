#pragma once

#include <string>
#include <vector>

#include "ktwin/model.hpp"

namespace ktwin {

// Well-known broker component names.
inline constexpr const char* kTopicExchange = "mqtt";
inline constexpr const char* kHeadersExchange = "broker";
inline constexpr const char* kMqttDispatcher = "mqtt-dispatcher";
inline constexpr const char* kCloudEventDispatcher = "cloudevent-dispatcher";
inline constexpr const char* kEventStoreDispatcher = "event-store-dispatcher";

enum class ExchangeKind { Topic, Headers };

struct Exchange {
    std::string name;
    ExchangeKind kind;
};

struct Queue {
    std::string name;
    std::string consumer;  // service or dispatcher draining this queue
};

struct Binding {
    std::string name;      // "<queue>--<hash>", stable across runs
    std::string exchange;  // kTopicExchange or kHeadersExchange
    std::string queue;     // destination queue
    // Topic exchange: routing-key pattern with '*' / '#' wildcards.
    // Headers exchange: dot-segment prefix matched against the event type.
    std::string pattern;
};

struct TopologyPlan {
    std::vector<Exchange> exchanges;
    std::vector<Queue> queues;
    std::vector<Binding> bindings;
};

// Derives the full broker layout from a resolved twin graph:
//  - one topic binding per event-producing interface feeding the MQTT
//    dispatcher,
//  - per serviced interface, header bindings for its real events (own queue)
//    and its virtual emissions (CloudEvent dispatcher),
//  - store bindings for interfaces that persist processed events,
//  - one binding per declared command into the declaring service's queue,
//  - pass-through bindings into the store dispatcher for interfaces that
//    persist raw device events without a service.
// Ordering is deterministic (rule-major, interface name within each rule).
TopologyPlan derive_topology(const TwinGraph& graph);

// Pretty JSON rendering of the plan (stable field order).
std::string plan_to_json(const TopologyPlan& plan);

// One-line summary: "exchanges=E queues=Q bindings=B".
std::string plan_summary(const TopologyPlan& plan);

}  // namespace ktwin
