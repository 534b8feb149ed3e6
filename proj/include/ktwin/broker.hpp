#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ktwin/topology.hpp"

namespace ktwin {

enum class EnvelopeKind { Mqtt, CloudEvent };

// One message hop. A logical event keeps its `id` (and first_publish time)
// across dispatcher conversions; `op_seq` is unique per publish operation.
struct Envelope {
    uint64_t id = 0;
    uint64_t op_seq = 0;
    EnvelopeKind kind = EnvelopeKind::Mqtt;
    std::string topic;    // mqtt kind: full routing key
    std::string type;     // cloudevent kind: interface-level type
    std::string source;   // cloudevent kind: instance identity
    std::string payload;  // structured text body
    double first_publish = 0.0;
    double published_at = 0.0;
};

// AMQP-style topic matcher: '*' = exactly one segment, '#' = zero or more.
class TopicMatcher {
public:
    void add(const std::string& pattern, int id);
    std::vector<int> match(const std::string& key) const;

private:
    struct Node {
        std::map<std::string, std::unique_ptr<Node>> children;
        std::vector<int> terminal;
    };
    Node root_;
};

// Headers-exchange matcher: a pattern matches an event type when the pattern
// equals a whole-dot-segment prefix of the type.
class HeaderMatcher {
public:
    void add(const std::string& pattern, int id);
    std::vector<int> match(const std::string& type) const;

private:
    std::map<std::string, std::vector<int>> by_pattern_;
};

struct BrokerCounters {
    uint64_t published = 0;         // publish operations, both exchanges
    uint64_t delivered = 0;         // envelope copies placed in queues
    uint64_t device_delivered = 0;  // envelope copies consumed by device subscriptions
    uint64_t dead_lettered = 0;     // publish operations that matched nothing
};

struct PublishOutcome {
    std::vector<std::string> queues;  // destination queues, plan order
    uint64_t device_deliveries = 0;
    bool dead_lettered = false;
};

// The broker pair: topic exchange fed by device-side MQTT publishes, headers
// exchange fed by dispatchers and services. Queues are plain FIFOs drained by
// the engine; device subscriptions are terminal sinks.
class Broker {
public:
    explicit Broker(const TopologyPlan& plan);

    // Exact-topic device subscription (an MQTT client, not a plan binding).
    void subscribe_device(const std::string& topic);

    PublishOutcome publish_topic(const Envelope& e);    // e.kind must be Mqtt
    PublishOutcome publish_headers(const Envelope& e);  // e.kind must be CloudEvent

    std::deque<Envelope>& queue(const std::string& name);
    const std::deque<Envelope>& queue(const std::string& name) const;
    bool all_queues_empty() const;
    size_t queued_total() const;

    const BrokerCounters& counters() const { return counters_; }
    const TopologyPlan& plan() const { return plan_; }
    std::vector<std::string>& deadletters() { return deadletters_; }
    const std::vector<std::string>& deadletters() const { return deadletters_; }

private:
    TopologyPlan plan_;
    TopicMatcher topic_;
    HeaderMatcher headers_;
    std::map<std::string, std::deque<Envelope>> queues_;
    std::unordered_map<std::string, uint64_t> device_subs_;  // topic -> receipt count
    BrokerCounters counters_;
    std::vector<std::string> deadletters_;

    void deadletter(const Envelope& e, const std::string& exchange, const std::string& what);
};

// Dispatcher conversions. The MQTT dispatcher lifts device publishes into
// CloudEvents; the CloudEvent dispatcher lowers virtual events back onto
// device topics. They are mutual inverses on well-formed keys.
Envelope to_cloudevent(const Envelope& mqtt_envelope);
Envelope to_mqtt(const Envelope& cloudevent_envelope);

}  // namespace ktwin
