#include <algorithm>
#include <set>
#include <string>

#include "ktwin/city.hpp"
#include "ktwin/model.hpp"
#include "ktwin/topology.hpp"
#include "vendor/doctest.h"
#include "vendor/json.hpp"

using namespace ktwin;

namespace {
#include "data/topology_expected.inc"

TopologyPlan city_plan(int n) {
    ResourceSet set = build_city(n);
    TwinGraph graph = resolve_graph(set.interfaces, set.instances);
    return derive_topology(graph);
}
}  // namespace

TEST_CASE("city topology matches the frozen counts") {
    TopologyPlan plan = city_plan(1);
    CHECK(static_cast<int>(plan.exchanges.size()) == kExpectedExchanges);
    CHECK(static_cast<int>(plan.queues.size()) == kExpectedQueues);
    CHECK(static_cast<int>(plan.bindings.size()) == kExpectedBindings);
}

TEST_CASE("topology is instance-invariant: plans are identical for any city size") {
    TopologyPlan p1 = city_plan(1);
    TopologyPlan p5 = city_plan(5);
    CHECK(plan_to_json(p1) == plan_to_json(p5));
}

TEST_CASE("exchanges are one topic and one headers exchange") {
    TopologyPlan plan = city_plan(1);
    REQUIRE(plan.exchanges.size() == 2);
    std::map<std::string, ExchangeKind> kinds;
    for (const auto& e : plan.exchanges) kinds[e.name] = e.kind;
    CHECK(kinds.at(kTopicExchange) == ExchangeKind::Topic);
    CHECK(kinds.at(kHeadersExchange) == ExchangeKind::Headers);
}

TEST_CASE("queues cover the three dispatchers and every serviced interface") {
    TopologyPlan plan = city_plan(1);
    std::set<std::string> queues;
    for (const auto& q : plan.queues) queues.insert(q.name);
    CHECK(queues.count(kMqttDispatcher) == 1);
    CHECK(queues.count(kCloudEventDispatcher) == 1);
    CHECK(queues.count(kEventStoreDispatcher) == 1);
    CHECK(queues.count(city::kPole) == 1);
    CHECK(queues.count(city::kDevice) == 1);
    // Direct-to-store interfaces run no service, hence no queue.
    CHECK(queues.count(city::kNoiseLevel) == 0);
    CHECK(queues.count(city::kEvCharging) == 0);
}

TEST_CASE("topic bindings capture device publishes per interface wildcard") {
    TopologyPlan plan = city_plan(1);
    int topic_bindings = 0;
    for (const auto& b : plan.bindings) {
        if (b.exchange != kTopicExchange) continue;
        ++topic_bindings;
        CHECK(b.queue == kMqttDispatcher);
        CHECK(b.pattern.rfind("ktwin.real.", 0) == 0);
        CHECK(b.pattern.substr(b.pattern.size() - 2) == ".*");
    }
    // 10 serviced + 2 persist-direct interfaces ingest device events.
    CHECK(topic_bindings == 12);
}

TEST_CASE("store bindings exist exactly for persisting interfaces") {
    TopologyPlan plan = city_plan(1);
    std::set<std::string> store_patterns;
    for (const auto& b : plan.bindings) {
        if (b.queue == kEventStoreDispatcher && b.exchange == kHeadersExchange) {
            store_patterns.insert(b.pattern);
        }
    }
    // 8 interfaces persist their store events, 2 persist raw device events.
    CHECK(store_patterns.size() == 10);
    CHECK(store_patterns.count("ktwin.store." + std::string(city::kWeather)) == 1);
    CHECK(store_patterns.count("ktwin.real." + std::string(city::kNoiseLevel)) == 1);
    CHECK(store_patterns.count("ktwin.store." + std::string(city::kPole)) == 0);
}

TEST_CASE("command bindings route to the declaring interface queue") {
    TopologyPlan plan = city_plan(1);
    int command_bindings = 0;
    for (const auto& b : plan.bindings) {
        if (b.pattern.rfind("ktwin.command.", 0) != 0) continue;
        ++command_bindings;
        // The pattern is an event type: ktwin.command.<iface>.<cmd>.
        std::string rest = b.pattern.substr(std::string("ktwin.command.").size());
        std::string iface = rest.substr(0, rest.find('.'));
        CHECK(b.queue == iface);
    }
    CHECK(command_bindings == 3);
}

TEST_CASE("binding names are unique and derived from the queue") {
    TopologyPlan plan = city_plan(1);
    std::set<std::string> names;
    for (const auto& b : plan.bindings) {
        CHECK(names.insert(b.name).second);
        CHECK(b.name.rfind(b.queue + "--", 0) == 0);
    }
}

TEST_CASE("commands on an unserviced interface are a model error") {
    TwinInterface silent;
    silent.name = "mute";
    CommandDef cmd;
    cmd.name = "speak";
    silent.commands.push_back(cmd);
    TwinGraph graph = resolve_graph({silent}, {});
    CHECK_THROWS_AS(derive_topology(graph), ModelError);
}

TEST_CASE("plan JSON includes the headline counts") {
    TopologyPlan plan = city_plan(1);
    auto j = nlohmann::json::parse(plan_to_json(plan));
    CHECK(j["counts"]["exchanges"] == kExpectedExchanges);
    CHECK(j["counts"]["queues"] == kExpectedQueues);
    CHECK(j["counts"]["bindings"] == kExpectedBindings);
    CHECK(plan_summary(plan) == "exchanges=2 queues=13 bindings=45");
}
