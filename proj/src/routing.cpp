#include "ktwin/routing.hpp"

#include <vector>

namespace ktwin {

namespace {

constexpr std::string_view kPrefix = "ktwin";

bool valid_segment(const std::string& s) {
    return !s.empty() && s.find('.') == std::string::npos;
}

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

}  // namespace

const char* category_token(EventCategory c) {
    switch (c) {
        case EventCategory::Real: return "real";
        case EventCategory::Virtual: return "virtual";
        case EventCategory::Command: return "command";
        case EventCategory::Store: return "store";
    }
    return "real";
}

std::optional<EventCategory> parse_category(const std::string& token) {
    if (token == "real") return EventCategory::Real;
    if (token == "virtual") return EventCategory::Virtual;
    if (token == "command") return EventCategory::Command;
    if (token == "store") return EventCategory::Store;
    return std::nullopt;
}

std::string encode_routing_key(EventCategory category, const std::string& interface,
                               const std::string& instance, const std::string& command) {
    if (!valid_segment(interface))
        throw RoutingError("routing key: invalid interface segment '" + interface + "'");
    if (!valid_segment(instance))
        throw RoutingError("routing key: invalid instance segment '" + instance + "'");
    bool has_command = !command.empty();
    if (has_command && category != EventCategory::Command)
        throw RoutingError("routing key: command segment only valid for command category");
    if (category == EventCategory::Command) {
        if (!valid_segment(command))
            throw RoutingError("routing key: invalid command segment '" + command + "'");
        return std::string(kPrefix) + ".command." + interface + "." + instance + "." + command;
    }
    return std::string(kPrefix) + "." + category_token(category) + "." + interface + "." +
           instance;
}

std::string encode_routing_key(const RoutingKey& key) {
    return encode_routing_key(key.category, key.interface, key.instance, key.command);
}

RoutingKey decode_routing_key(const std::string& key) {
    auto parts = split_dots(key);
    if (parts.size() < 4 || parts[0] != kPrefix)
        throw RoutingError("routing key '" + key + "': expected ktwin.<category>.<interface>.<instance>");
    auto cat = parse_category(parts[1]);
    if (!cat) throw RoutingError("routing key '" + key + "': unknown category '" + parts[1] + "'");
    size_t want = *cat == EventCategory::Command ? 5 : 4;
    if (parts.size() != want)
        throw RoutingError("routing key '" + key + "': wrong segment count for category '" +
                           parts[1] + "'");
    for (size_t i = 2; i < parts.size(); ++i)
        if (parts[i].empty())
            throw RoutingError("routing key '" + key + "': empty segment");
    RoutingKey out;
    out.category = *cat;
    out.interface = parts[2];
    out.instance = parts[3];
    if (*cat == EventCategory::Command) out.command = parts[4];
    return out;
}

std::string event_type_of(EventCategory category, const std::string& interface,
                          const std::string& command) {
    if (category == EventCategory::Command)
        return std::string(kPrefix) + ".command." + interface + "." + command;
    return std::string(kPrefix) + "." + category_token(category) + "." + interface;
}

std::string event_type_of(const RoutingKey& key) {
    return event_type_of(key.category, key.interface, key.command);
}

}  // namespace ktwin
