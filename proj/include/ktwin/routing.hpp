#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ktwin {

// The four event subcategories carried in routing keys and CloudEvent types.
enum class EventCategory { Real, Virtual, Command, Store };

const char* category_token(EventCategory c);
std::optional<EventCategory> parse_category(const std::string& token);

struct RoutingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Decoded form of an MQTT-side routing key:
//   ktwin.<category>.<interface>.<instance>[.<command>]
// The command segment is present exactly for Command keys.
struct RoutingKey {
    EventCategory category{EventCategory::Real};
    std::string interface;
    std::string instance;
    std::string command;  // empty unless category == Command

    bool operator==(const RoutingKey&) const = default;
};

std::string encode_routing_key(EventCategory category, const std::string& interface,
                               const std::string& instance,
                               const std::string& command = "");
std::string encode_routing_key(const RoutingKey& key);

// Throws RoutingError on malformed input (wrong prefix, unknown category,
// wrong segment count).
RoutingKey decode_routing_key(const std::string& key);

// Interface-level CloudEvent type: ktwin.<category>.<interface> for
// real/virtual/store, ktwin.command.<interface>.<command> for commands.
// Instance identity travels in the event source attribute, never in the type.
std::string event_type_of(const RoutingKey& key);
std::string event_type_of(EventCategory category, const std::string& interface,
                          const std::string& command = "");

}  // namespace ktwin
