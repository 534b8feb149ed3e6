#include "ktwin/broker.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ktwin/routing.hpp"

namespace ktwin {

namespace {

std::vector<std::string> split_dots(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t dot = s.find('.', start);
        if (dot == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, dot - start));
        start = dot + 1;
    }
}

}  // namespace

void TopicMatcher::add(const std::string& pattern, int id) {
    Node* node = &root_;
    for (const auto& seg : split_dots(pattern)) {
        auto& child = node->children[seg];
        if (!child) child = std::make_unique<Node>();
        node = child.get();
    }
    node->terminal.push_back(id);
}

std::vector<int> TopicMatcher::match(const std::string& key) const {
    const std::vector<std::string> segs = split_dots(key);
    std::set<int> hits;

    // Depth-first walk; '#' may swallow zero or more segments.
    auto step = [&](auto&& self, const Node* node, size_t i) -> void {
        if (i == segs.size()) {
            for (int id : node->terminal) hits.insert(id);
            if (auto it = node->children.find("#"); it != node->children.end())
                self(self, it->second.get(), i);
            return;
        }
        if (auto it = node->children.find(segs[i]); it != node->children.end())
            self(self, it->second.get(), i + 1);
        if (auto it = node->children.find("*"); it != node->children.end())
            self(self, it->second.get(), i + 1);
        if (auto it = node->children.find("#"); it != node->children.end())
            for (size_t j = i; j <= segs.size(); ++j) self(self, it->second.get(), j);
    };
    step(step, &root_, 0);
    return {hits.begin(), hits.end()};
}

void HeaderMatcher::add(const std::string& pattern, int id) {
    by_pattern_[pattern].push_back(id);
}

std::vector<int> HeaderMatcher::match(const std::string& type) const {
    std::set<int> hits;
    // Probe every whole-segment prefix of the type (types have few segments).
    std::string prefix;
    for (const auto& seg : split_dots(type)) {
        if (!prefix.empty()) prefix.push_back('.');
        prefix += seg;
        if (auto it = by_pattern_.find(prefix); it != by_pattern_.end())
            for (int id : it->second) hits.insert(id);
    }
    return {hits.begin(), hits.end()};
}

Broker::Broker(const TopologyPlan& plan) : plan_(plan) {
    for (const auto& q : plan_.queues) queues_[q.name];
    for (size_t i = 0; i < plan_.bindings.size(); ++i) {
        const Binding& b = plan_.bindings[i];
        if (!queues_.count(b.queue))
            throw RoutingError("binding '" + b.name + "' targets unknown queue '" + b.queue + "'");
        if (b.exchange == kTopicExchange)
            topic_.add(b.pattern, static_cast<int>(i));
        else if (b.exchange == kHeadersExchange)
            headers_.add(b.pattern, static_cast<int>(i));
        else
            throw RoutingError("binding '" + b.name + "' names unknown exchange '" + b.exchange + "'");
    }
}

void Broker::subscribe_device(const std::string& topic) { device_subs_[topic]; }

void Broker::deadletter(const Envelope& e, const std::string& exchange, const std::string& what) {
    counters_.dead_lettered++;
    std::ostringstream os;
    os << e.published_at << " exchange=" << exchange << " " << what << " id=" << e.id;
    deadletters_.push_back(os.str());
}

PublishOutcome Broker::publish_topic(const Envelope& e) {
    counters_.published++;
    PublishOutcome out;
    for (int idx : topic_.match(e.topic)) {
        const Binding& b = plan_.bindings[static_cast<size_t>(idx)];
        queues_[b.queue].push_back(e);
        counters_.delivered++;
        out.queues.push_back(b.queue);
    }
    if (auto it = device_subs_.find(e.topic); it != device_subs_.end()) {
        it->second++;
        counters_.device_delivered++;
        out.device_deliveries++;
    }
    if (out.queues.empty() && out.device_deliveries == 0) {
        out.dead_lettered = true;
        deadletter(e, kTopicExchange, "no-route topic=" + e.topic);
    }
    return out;
}

PublishOutcome Broker::publish_headers(const Envelope& e) {
    counters_.published++;
    PublishOutcome out;
    for (int idx : headers_.match(e.type)) {
        const Binding& b = plan_.bindings[static_cast<size_t>(idx)];
        queues_[b.queue].push_back(e);
        counters_.delivered++;
        out.queues.push_back(b.queue);
    }
    if (out.queues.empty()) {
        out.dead_lettered = true;
        deadletter(e, kHeadersExchange, "no-route type=" + e.type);
    }
    return out;
}

std::deque<Envelope>& Broker::queue(const std::string& name) {
    auto it = queues_.find(name);
    if (it == queues_.end()) throw RoutingError("unknown queue '" + name + "'");
    return it->second;
}

const std::deque<Envelope>& Broker::queue(const std::string& name) const {
    auto it = queues_.find(name);
    if (it == queues_.end()) throw RoutingError("unknown queue '" + name + "'");
    return it->second;
}

bool Broker::all_queues_empty() const {
    return std::all_of(queues_.begin(), queues_.end(),
                       [](const auto& kv) { return kv.second.empty(); });
}

size_t Broker::queued_total() const {
    size_t n = 0;
    for (const auto& [_, q] : queues_) n += q.size();
    return n;
}

Envelope to_cloudevent(const Envelope& mqtt_envelope) {
    if (mqtt_envelope.kind != EnvelopeKind::Mqtt)
        throw RoutingError("mqtt dispatcher received a non-mqtt envelope");
    const RoutingKey key = decode_routing_key(mqtt_envelope.topic);
    Envelope out = mqtt_envelope;
    out.kind = EnvelopeKind::CloudEvent;
    out.type = event_type_of(key);
    out.source = key.instance;
    out.topic.clear();
    return out;
}

Envelope to_mqtt(const Envelope& cloudevent_envelope) {
    if (cloudevent_envelope.kind != EnvelopeKind::CloudEvent)
        throw RoutingError("cloudevent dispatcher received a non-cloudevent envelope");
    // Recover the category and interface from the type, then rebuild the
    // full routing key with the source instance spliced back in.
    const std::vector<std::string> segs = [&] {
        std::vector<std::string> v;
        std::stringstream ss(cloudevent_envelope.type);
        std::string item;
        while (std::getline(ss, item, '.')) v.push_back(item);
        return v;
    }();
    if (segs.size() < 3 || segs[0] != "ktwin")
        throw RoutingError("malformed event type '" + cloudevent_envelope.type + "'");
    const auto category = parse_category(segs[1]);
    if (!category) throw RoutingError("malformed event type '" + cloudevent_envelope.type + "'");
    std::string command;
    if (*category == EventCategory::Command) {
        if (segs.size() != 4)
            throw RoutingError("malformed command type '" + cloudevent_envelope.type + "'");
        command = segs[3];
    } else if (segs.size() != 3) {
        throw RoutingError("malformed event type '" + cloudevent_envelope.type + "'");
    }
    Envelope out = cloudevent_envelope;
    out.kind = EnvelopeKind::Mqtt;
    out.topic = encode_routing_key(*category, segs[2], cloudevent_envelope.source, command);
    out.type.clear();
    out.source.clear();
    return out;
}

}  // namespace ktwin
