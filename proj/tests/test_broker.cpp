#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ktwin/broker.hpp"
#include "ktwin/city.hpp"
#include "ktwin/model.hpp"
#include "ktwin/rng.hpp"
#include "ktwin/routing.hpp"
#include "ktwin/topology.hpp"
#include "vendor/doctest.h"

using namespace ktwin;

namespace {

std::vector<std::string> split_dots(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t dot = s.find('.', start);
        if (dot == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, dot - start));
        start = dot + 1;
    }
}

// Straight-line reference for AMQP topic semantics: '*' is exactly one
// segment, '#' any number including zero.
bool ref_match(const std::vector<std::string>& pat, size_t pi, const std::vector<std::string>& key,
               size_t ki) {
    if (pi == pat.size()) return ki == key.size();
    if (pat[pi] == "#") {
        for (size_t skip = ki; skip <= key.size(); ++skip) {
            if (ref_match(pat, pi + 1, key, skip)) return true;
        }
        return false;
    }
    if (ki == key.size()) return false;
    if (pat[pi] != "*" && pat[pi] != key[ki]) return false;
    return ref_match(pat, pi + 1, key, ki + 1);
}

std::string random_words(std::mt19937_64& rng, int len, bool wildcards) {
    static const char* words[] = {"ktwin", "real", "virtual", "alpha", "beta", "gamma", "x"};
    std::uniform_int_distribution<int> word(0, 6);
    std::uniform_int_distribution<int> kind(0, 9);
    std::string out;
    for (int i = 0; i < len; ++i) {
        if (!out.empty()) out += '.';
        int k = wildcards ? kind(rng) : 10;
        if (k == 0) {
            out += '#';
        } else if (k <= 2) {
            out += '*';
        } else {
            out += words[word(rng)];
        }
    }
    return out;
}

Envelope mqtt_envelope(const std::string& topic, uint64_t id = 1) {
    Envelope e;
    e.id = id;
    e.op_seq = id;
    e.kind = EnvelopeKind::Mqtt;
    e.topic = topic;
    e.payload = "{}";
    return e;
}

Envelope cloud_envelope(const std::string& type, const std::string& source, uint64_t id = 1) {
    Envelope e;
    e.id = id;
    e.op_seq = id;
    e.kind = EnvelopeKind::CloudEvent;
    e.type = type;
    e.source = source;
    e.payload = "{}";
    return e;
}

Broker city_broker() {
    ResourceSet set = build_city(1);
    TwinGraph graph = resolve_graph(set.interfaces, set.instances);
    return Broker(derive_topology(graph));
}

}  // namespace

TEST_CASE("topic matcher agrees with the reference on random patterns and keys") {
    auto rng = make_stream(2024, "trie-vs-reference");
    std::uniform_int_distribution<int> pat_len(1, 5);
    std::uniform_int_distribution<int> key_len(1, 5);

    std::vector<std::string> patterns;
    TopicMatcher trie;
    for (int i = 0; i < 250; ++i) {
        std::string p = random_words(rng, pat_len(rng), true);
        patterns.push_back(p);
        trie.add(p, i);
    }
    std::vector<std::vector<std::string>> pat_segs;
    pat_segs.reserve(patterns.size());
    for (const auto& p : patterns) pat_segs.push_back(split_dots(p));

    int mismatches = 0;
    for (int k = 0; k < 600; ++k) {
        std::string key = random_words(rng, key_len(rng), false);
        auto key_segs = split_dots(key);
        std::set<int> expected;
        for (size_t i = 0; i < pat_segs.size(); ++i) {
            if (ref_match(pat_segs[i], 0, key_segs, 0)) expected.insert(static_cast<int>(i));
        }
        auto got_list = trie.match(key);
        std::set<int> got(got_list.begin(), got_list.end());
        if (got != expected) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("topic matcher handles hash across multiple segments") {
    TopicMatcher m;
    m.add("ktwin.real.#", 1);
    m.add("ktwin.*.weather.*", 2);
    m.add("#", 3);
    auto ids = [&](const std::string& key) {
        auto v = m.match(key);
        return std::set<int>(v.begin(), v.end());
    };
    CHECK(ids("ktwin.real.weather.w1") == std::set<int>{1, 2, 3});
    CHECK(ids("ktwin.real") == std::set<int>{1, 3});
    CHECK(ids("ktwin.virtual.weather.w1") == std::set<int>{2, 3});
    CHECK(ids("other") == std::set<int>{3});
}

TEST_CASE("header matcher matches whole-dot-segment prefixes only") {
    HeaderMatcher m;
    m.add("ktwin.real.foo", 1);
    m.add("ktwin.real", 2);
    m.add("ktwin.command.foo.doit", 3);
    auto ids = [&](const std::string& type) {
        auto v = m.match(type);
        return std::set<int>(v.begin(), v.end());
    };
    CHECK(ids("ktwin.real.foo") == std::set<int>{1, 2});
    CHECK(ids("ktwin.real.foobar") == std::set<int>{2});  // not a segment boundary
    CHECK(ids("ktwin.real") == std::set<int>{2});
    CHECK(ids("ktwin.command.foo.doit") == std::set<int>{3});
    CHECK(ids("ktwin.command.foo") == std::set<int>{});
}

TEST_CASE("device real events route to the MQTT dispatcher") {
    Broker broker = city_broker();
    auto out = broker.publish_topic(
        mqtt_envelope("ktwin.real." + std::string(city::kWeather) + ".nb0-weather-03"));
    REQUIRE(out.queues.size() == 1);
    CHECK(out.queues[0] == kMqttDispatcher);
    CHECK_FALSE(out.dead_lettered);
    CHECK(broker.queue(kMqttDispatcher).size() == 1);
}

TEST_CASE("converted real events land in the owning service queue") {
    Broker broker = city_broker();
    auto out = broker.publish_headers(
        cloud_envelope("ktwin.real." + std::string(city::kWeather), "nb0-weather-03"));
    REQUIRE(out.queues.size() == 1);
    CHECK(out.queues[0] == city::kWeather);
}

TEST_CASE("store events and direct-persist reals reach the store dispatcher") {
    Broker broker = city_broker();
    auto a = broker.publish_headers(
        cloud_envelope("ktwin.store." + std::string(city::kWeather), "nb0-weather-03"));
    REQUIRE(a.queues == std::vector<std::string>{kEventStoreDispatcher});
    auto b = broker.publish_headers(
        cloud_envelope("ktwin.real." + std::string(city::kNoiseLevel), "nb0-noise-11"));
    REQUIRE(b.queues == std::vector<std::string>{kEventStoreDispatcher});
}

TEST_CASE("virtual events go to the CloudEvent dispatcher, then to the device") {
    Broker broker = city_broker();
    auto out = broker.publish_headers(
        cloud_envelope("ktwin.virtual." + std::string(city::kDevice), "nb0-dev-001"));
    REQUIRE(out.queues == std::vector<std::string>{kCloudEventDispatcher});

    // Lowered back to MQTT without a subscriber: dead letter.
    Envelope lowered = to_mqtt(
        cloud_envelope("ktwin.virtual." + std::string(city::kDevice), "nb0-dev-001"));
    auto miss = broker.publish_topic(lowered);
    CHECK(miss.dead_lettered);
    CHECK(broker.counters().dead_lettered == 1);

    // With the device subscribed the delivery is terminal, not queued.
    broker.subscribe_device("ktwin.virtual." + std::string(city::kDevice) + ".nb0-dev-001");
    auto hit = broker.publish_topic(lowered);
    CHECK_FALSE(hit.dead_lettered);
    CHECK(hit.queues.empty());
    CHECK(hit.device_deliveries == 1);
    CHECK(broker.counters().device_delivered == 1);
}

TEST_CASE("commands route to the declaring interface queue") {
    Broker broker = city_broker();
    auto out = broker.publish_headers(cloud_envelope(
        "ktwin.command." + std::string(city::kPole) + ".updateairqualityindex", "nb0-pole-00"));
    REQUIRE(out.queues == std::vector<std::string>{city::kPole});
}

TEST_CASE("unroutable publishes are dead-lettered with an audit line") {
    Broker broker = city_broker();
    auto out = broker.publish_headers(cloud_envelope("ktwin.store.city-pole", "nb0-pole-00"));
    CHECK(out.dead_lettered);
    REQUIRE(broker.deadletters().size() == 1);
    CHECK(broker.deadletters()[0].find(kHeadersExchange) != std::string::npos);
}

TEST_CASE("broker counters add up") {
    Broker broker = city_broker();
    broker.publish_topic(mqtt_envelope("ktwin.real." + std::string(city::kWeather) + ".w", 1));
    broker.publish_headers(cloud_envelope("ktwin.real." + std::string(city::kWeather), "w", 2));
    broker.publish_headers(cloud_envelope("ktwin.store.city-pole", "p", 3));  // dead letter
    const auto& c = broker.counters();
    CHECK(c.published == 3);
    CHECK(c.delivered == 2);
    CHECK(c.dead_lettered == 1);
    CHECK(broker.queued_total() == 2);
    CHECK_FALSE(broker.all_queues_empty());
    CHECK_THROWS_AS(broker.queue("no-such-queue"), RoutingError);
}

TEST_CASE("dispatcher conversions are mutual inverses") {
    Envelope device = mqtt_envelope("ktwin.real.city-pole.nb0-pole-07", 42);
    device.first_publish = 1.25;
    Envelope ce = to_cloudevent(device);
    CHECK(ce.kind == EnvelopeKind::CloudEvent);
    CHECK(ce.type == "ktwin.real.city-pole");
    CHECK(ce.source == "nb0-pole-07");
    CHECK(ce.id == 42);
    CHECK(ce.first_publish == 1.25);

    Envelope back = to_mqtt(ce);
    CHECK(back.kind == EnvelopeKind::Mqtt);
    CHECK(back.topic == device.topic);
    CHECK(back.id == 42);

    Envelope cmd = cloud_envelope("ktwin.command.city-pole.updateairqualityindex", "nb0-pole-07");
    Envelope cmd_key = to_mqtt(cmd);
    CHECK(cmd_key.topic == "ktwin.command.city-pole.nb0-pole-07.updateairqualityindex");
}

TEST_CASE("conversions reject malformed input") {
    CHECK_THROWS_AS(to_cloudevent(mqtt_envelope("not-a-key")), RoutingError);
    CHECK_THROWS_AS(to_mqtt(cloud_envelope("ktwin.bogus.x", "y")), RoutingError);
    CHECK_THROWS_AS(to_mqtt(cloud_envelope("ktwin.command.x", "y")), RoutingError);
    Envelope wrong_kind = cloud_envelope("ktwin.real.x", "y");
    CHECK_THROWS_AS(to_cloudevent(wrong_kind), RoutingError);
}
