#include "ktwin/topology.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "ktwin/rng.hpp"
#include "ktwin/routing.hpp"

namespace ktwin {

namespace {

std::string binding_name(const std::string& exchange, const std::string& pattern,
                         const std::string& queue) {
    const uint64_t h = fnv1a64(exchange + "|" + pattern + "|" + queue);
    char buf[9];
    snprintf(buf, sizeof(buf), "%08x", static_cast<uint32_t>(h >> 32));
    return queue + "--" + buf;
}

Binding make_binding(const std::string& exchange, const std::string& pattern,
                     const std::string& queue) {
    return Binding{binding_name(exchange, pattern, queue), exchange, queue, pattern};
}

}  // namespace

TopologyPlan derive_topology(const TwinGraph& graph) {
    TopologyPlan plan;
    plan.exchanges.push_back({kTopicExchange, ExchangeKind::Topic});
    plan.exchanges.push_back({kHeadersExchange, ExchangeKind::Headers});

    // Queues: one per serviced interface, then the three dispatchers.
    for (const auto& [name, iface] : graph.interfaces) {
        if (iface.serviced()) plan.queues.push_back({name, name});
        if (iface.commands.size() > 0 && !iface.serviced())
            throw ModelError("interface '" + name + "' declares commands but has no service");
    }
    plan.queues.push_back({kMqttDispatcher, kMqttDispatcher});
    plan.queues.push_back({kCloudEventDispatcher, kCloudEventDispatcher});
    plan.queues.push_back({kEventStoreDispatcher, kEventStoreDispatcher});

    // Rule 1: every interface whose devices publish real events funnels them
    // through the MQTT dispatcher for CloudEvent conversion.
    for (const auto& [name, iface] : graph.interfaces) {
        if (iface.serviced() || iface.routing.persist_real_directly)
            plan.bindings.push_back(make_binding(
                kTopicExchange, "ktwin.real." + name + ".*", kMqttDispatcher));
    }
    // Rule 2: converted real events land in the owning service's queue.
    for (const auto& [name, iface] : graph.interfaces)
        if (iface.serviced())
            plan.bindings.push_back(
                make_binding(kHeadersExchange, event_type_of(EventCategory::Real, name), name));
    // Rule 3: virtual emissions from services head back out via the
    // CloudEvent dispatcher.
    for (const auto& [name, iface] : graph.interfaces)
        if (iface.serviced())
            plan.bindings.push_back(make_binding(
                kHeadersExchange, event_type_of(EventCategory::Virtual, name), kCloudEventDispatcher));
    // Rule 4: processed-event persistence.
    for (const auto& [name, iface] : graph.interfaces)
        if (iface.routing.persist_store_events)
            plan.bindings.push_back(make_binding(
                kHeadersExchange, event_type_of(EventCategory::Store, name), kEventStoreDispatcher));
    // Rule 5: command delivery to the declaring service.
    for (const auto& [name, iface] : graph.interfaces)
        for (const auto& cmd : iface.commands)
            plan.bindings.push_back(make_binding(
                kHeadersExchange, event_type_of(EventCategory::Command, name, cmd.name), name));
    // Rule 6: raw device events persisted without a service.
    for (const auto& [name, iface] : graph.interfaces)
        if (iface.routing.persist_real_directly)
            plan.bindings.push_back(make_binding(
                kHeadersExchange, event_type_of(EventCategory::Real, name), kEventStoreDispatcher));

    return plan;
}

std::string plan_to_json(const TopologyPlan& plan) {
    nlohmann::ordered_json j;
    j["exchanges"] = nlohmann::ordered_json::array();
    for (const auto& e : plan.exchanges)
        j["exchanges"].push_back({{"name", e.name},
                                  {"kind", e.kind == ExchangeKind::Topic ? "topic" : "headers"}});
    j["queues"] = nlohmann::ordered_json::array();
    for (const auto& q : plan.queues)
        j["queues"].push_back({{"name", q.name}, {"consumer", q.consumer}});
    j["bindings"] = nlohmann::ordered_json::array();
    for (const auto& b : plan.bindings)
        j["bindings"].push_back({{"name", b.name},
                                 {"exchange", b.exchange},
                                 {"queue", b.queue},
                                 {"pattern", b.pattern}});
    j["counts"] = {{"exchanges", plan.exchanges.size()},
                   {"queues", plan.queues.size()},
                   {"bindings", plan.bindings.size()}};
    return j.dump(2) + "\n";
}

std::string plan_summary(const TopologyPlan& plan) {
    std::ostringstream os;
    os << "exchanges=" << plan.exchanges.size() << " queues=" << plan.queues.size()
       << " bindings=" << plan.bindings.size();
    return os.str();
}

}  // namespace ktwin
