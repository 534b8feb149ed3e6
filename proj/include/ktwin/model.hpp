#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ktwin {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Schema { String, Integer, Float, Boolean, Enumeration };

const char* schema_name(Schema s);
std::optional<Schema> parse_schema(const std::string& name);

struct Property {
    std::string name;
    std::string description;
    Schema schema{Schema::String};
    std::vector<std::string> enum_values;  // for Schema::Enumeration
};

enum class Multiplicity { One, Many };

struct RelationshipDef {
    std::string name;
    std::string description;
    std::string target;  // target interface name
    Multiplicity multiplicity{Multiplicity::One};
};

struct CommandDef {
    std::string name;
    std::string description;
    std::string payload_schema;  // free-form descriptor, e.g. "json"
};

struct AutoscalePolicy {
    std::string metric = "concurrency";
    int target = 5;
    int min_replicas = 0;
    int max_replicas = 18;
};

struct ServiceSettings {
    std::string handler;       // built-in handler id in this artifact
    double cpu = 0.1;          // fractional cores requested per pod
    uint64_t memory_mib = 64;  // MiB requested per pod
    AutoscalePolicy autoscale;
};

struct RoutingSettings {
    bool persist_real_directly = false;
    bool persist_store_events = false;
};

struct TwinInterface {
    std::string name;
    std::string description;
    std::string parent;  // optional parent interface for inheritance
    std::vector<Property> properties;
    std::vector<RelationshipDef> relationships;
    std::vector<CommandDef> commands;
    std::optional<ServiceSettings> service;
    RoutingSettings routing;

    bool serviced() const { return service.has_value(); }
};

using PropertyValue = std::variant<std::string, int64_t, double, bool>;

struct RelationshipRef {
    std::string name;
    std::string target_interface;
    std::vector<std::string> targets;  // target instance names
};

struct TwinInstance {
    std::string name;
    std::string interface;
    std::map<std::string, PropertyValue> properties;
    std::vector<RelationshipRef> relationships;
};

// Resolved, immutable view of the twin network. Interfaces are flattened
// (inheritance applied, child overrides parent by member name) and every
// reference has been checked.
struct TwinGraph {
    std::map<std::string, TwinInterface> interfaces;  // flattened
    std::map<std::string, TwinInstance> instances;
    // instance name -> outgoing refs (shared with the instance's own list)
    std::map<std::string, std::vector<RelationshipRef>> adjacency;

    const TwinInterface* find_interface(const std::string& name) const;
    const TwinInstance* find_instance(const std::string& name) const;
    // First relationship target of the instance, optionally filtered by
    // target interface. Returns empty string when absent.
    std::string related_target(const std::string& instance,
                               const std::string& target_interface) const;
};

// Flattens inheritance and validates all referential invariants.
// Throws ModelError on cycles, dangling references, duplicate names,
// schema-incompatible property values, or multiplicity violations.
TwinGraph resolve_graph(const std::vector<TwinInterface>& interfaces,
                        const std::vector<TwinInstance>& instances);

// Flattens a single interface chain (used by resolve_graph; exposed for tests).
TwinInterface flatten_interface(const std::map<std::string, TwinInterface>& all,
                                const std::string& name);

struct SubgraphNode {
    std::string instance;
    std::vector<RelationshipRef> relationships;
};

struct Subgraph {
    std::string interface;
    std::vector<SubgraphNode> nodes;  // ordered by instance name
    // Canonical encoding (compact JSON, sorted keys); size_bytes is its length.
    std::string canonical;
    size_t size_bytes = 0;
};

// Per-interface slice of the graph: all instances of `interface` plus their
// outgoing relationship targets. Served from a cache built at resolve time.
class SubgraphCache {
public:
    explicit SubgraphCache(const TwinGraph& graph);
    const Subgraph& get(const std::string& interface) const;  // throws on unknown
    size_t total_bytes() const;

private:
    std::map<std::string, Subgraph> by_interface_;
};

}  // namespace ktwin
