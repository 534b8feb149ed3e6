#include "ktwin/model.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace ktwin {

const char* schema_name(Schema s) {
    switch (s) {
        case Schema::String: return "string";
        case Schema::Integer: return "integer";
        case Schema::Float: return "float";
        case Schema::Boolean: return "boolean";
        case Schema::Enumeration: return "enumeration";
    }
    return "string";
}

std::optional<Schema> parse_schema(const std::string& name) {
    if (name == "string") return Schema::String;
    if (name == "integer") return Schema::Integer;
    if (name == "float") return Schema::Float;
    if (name == "boolean") return Schema::Boolean;
    if (name == "enumeration") return Schema::Enumeration;
    return std::nullopt;
}

const TwinInterface* TwinGraph::find_interface(const std::string& name) const {
    auto it = interfaces.find(name);
    return it == interfaces.end() ? nullptr : &it->second;
}

const TwinInstance* TwinGraph::find_instance(const std::string& name) const {
    auto it = instances.find(name);
    return it == instances.end() ? nullptr : &it->second;
}

std::string TwinGraph::related_target(const std::string& instance,
                                      const std::string& target_interface) const {
    auto it = adjacency.find(instance);
    if (it == adjacency.end()) return "";
    for (const auto& ref : it->second) {
        if (!ref.targets.empty() &&
            (target_interface.empty() || ref.target_interface == target_interface))
            return ref.targets.front();
    }
    return "";
}

namespace {

template <typename T>
void merge_by_name(std::vector<T>& base, const std::vector<T>& child) {
    // Child overrides parent on name collision; otherwise appended in
    // declaration order after the inherited members.
    for (const auto& item : child) {
        auto it = std::find_if(base.begin(), base.end(),
                               [&](const T& b) { return b.name == item.name; });
        if (it != base.end())
            *it = item;
        else
            base.push_back(item);
    }
}

bool value_matches_schema(const Property& prop, const PropertyValue& value) {
    switch (prop.schema) {
        case Schema::String:
            return std::holds_alternative<std::string>(value);
        case Schema::Integer:
            return std::holds_alternative<int64_t>(value);
        case Schema::Float:
            // integer literals are acceptable where a float is declared
            return std::holds_alternative<double>(value) ||
                   std::holds_alternative<int64_t>(value);
        case Schema::Boolean:
            return std::holds_alternative<bool>(value);
        case Schema::Enumeration: {
            const auto* s = std::get_if<std::string>(&value);
            if (!s) return false;
            return std::find(prop.enum_values.begin(), prop.enum_values.end(), *s) !=
                   prop.enum_values.end();
        }
    }
    return false;
}

}  // namespace

TwinInterface flatten_interface(const std::map<std::string, TwinInterface>& all,
                                const std::string& name) {
    // Walk the parent chain root-first, merging child members over the parent's.
    std::vector<const TwinInterface*> chain;
    std::set<std::string> seen;
    std::string cur = name;
    while (!cur.empty()) {
        if (!seen.insert(cur).second)
            throw ModelError("interface '" + name + "': inheritance cycle through '" + cur + "'");
        auto it = all.find(cur);
        if (it == all.end())
            throw ModelError("interface '" + name + "': unknown parent '" + cur + "'");
        chain.push_back(&it->second);
        cur = it->second.parent;
    }
    TwinInterface out = *chain.back();  // root ancestor
    out.name = name;
    for (auto it = std::next(chain.rbegin()); it != chain.rend(); ++it) {
        const TwinInterface& layer = **it;
        merge_by_name(out.properties, layer.properties);
        merge_by_name(out.relationships, layer.relationships);
        merge_by_name(out.commands, layer.commands);
        if (!layer.description.empty()) out.description = layer.description;
        if (layer.service) out.service = layer.service;
        out.routing = layer.routing;
    }
    out.parent.clear();  // flattened
    return out;
}

TwinGraph resolve_graph(const std::vector<TwinInterface>& interfaces,
                        const std::vector<TwinInstance>& instances) {
    std::map<std::string, TwinInterface> declared;
    for (const auto& iface : interfaces) {
        if (iface.name.empty()) throw ModelError("interface with empty name");
        if (!declared.emplace(iface.name, iface).second)
            throw ModelError("duplicate interface name '" + iface.name + "'");
    }

    TwinGraph graph;
    for (const auto& [name, iface] : declared) {
        TwinInterface flat = flatten_interface(declared, name);
        // Referential checks on the flattened shape.
        for (const auto& rel : flat.relationships)
            if (!declared.count(rel.target))
                throw ModelError("interface '" + name + "': relationship '" + rel.name +
                                 "' targets unknown interface '" + rel.target + "'");
        std::set<std::string> cmd_names;
        for (const auto& cmd : flat.commands)
            if (!cmd_names.insert(cmd.name).second)
                throw ModelError("interface '" + name + "': duplicate command '" + cmd.name + "'");
        if (flat.service) {
            const auto& p = flat.service->autoscale;
            if (p.min_replicas > p.max_replicas)
                throw ModelError("interface '" + name + "': autoscale min > max");
            if (p.target < 1)
                throw ModelError("interface '" + name + "': autoscale target must be >= 1");
            if (flat.service->cpu <= 0 || flat.service->memory_mib == 0)
                throw ModelError("interface '" + name + "': cpu/memory requests must be positive");
        }
        graph.interfaces.emplace(name, std::move(flat));
    }

    for (const auto& inst : instances) {
        if (inst.name.empty()) throw ModelError("instance with empty name");
        const TwinInterface* iface = nullptr;
        {
            auto it = graph.interfaces.find(inst.interface);
            if (it == graph.interfaces.end())
                throw ModelError("instance '" + inst.name + "': unknown interface '" +
                                 inst.interface + "'");
            iface = &it->second;
        }
        for (const auto& [pname, pvalue] : inst.properties) {
            auto pit = std::find_if(iface->properties.begin(), iface->properties.end(),
                                    [&](const Property& p) { return p.name == pname; });
            if (pit == iface->properties.end())
                throw ModelError("instance '" + inst.name + "': unknown property '" + pname + "'");
            if (!value_matches_schema(*pit, pvalue))
                throw ModelError("instance '" + inst.name + "': property '" + pname +
                                 "' does not match schema " + schema_name(pit->schema));
        }
        for (const auto& ref : inst.relationships) {
            auto rit = std::find_if(iface->relationships.begin(), iface->relationships.end(),
                                    [&](const RelationshipDef& r) { return r.name == ref.name; });
            if (rit == iface->relationships.end())
                throw ModelError("instance '" + inst.name + "': unknown relationship '" +
                                 ref.name + "'");
            if (rit->multiplicity == Multiplicity::One && ref.targets.size() != 1)
                throw ModelError("instance '" + inst.name + "': relationship '" + ref.name +
                                 "' requires exactly one target");
        }
        if (!graph.instances.emplace(inst.name, inst).second)
            throw ModelError("duplicate instance name '" + inst.name + "'");
    }

    // Relationship target existence needs the full instance set, so a second pass.
    for (auto& [name, inst] : graph.instances) {
        const TwinInterface& iface = graph.interfaces.at(inst.interface);
        for (auto& ref : inst.relationships) {
            auto rit = std::find_if(iface.relationships.begin(), iface.relationships.end(),
                                    [&](const RelationshipDef& r) { return r.name == ref.name; });
            ref.target_interface = rit->target;
            for (const auto& target : ref.targets) {
                auto tit = graph.instances.find(target);
                if (tit == graph.instances.end())
                    throw ModelError("instance '" + name + "': relationship '" + ref.name +
                                     "' targets unknown instance '" + target + "'");
                if (tit->second.interface != rit->target)
                    throw ModelError("instance '" + name + "': relationship '" + ref.name +
                                     "' target '" + target + "' has interface '" +
                                     tit->second.interface + "', expected '" + rit->target + "'");
            }
        }
        graph.adjacency[name] = inst.relationships;
    }
    return graph;
}

namespace {

nlohmann::json relationship_json(const RelationshipRef& ref) {
    nlohmann::json j;
    j["name"] = ref.name;
    j["targetInterface"] = ref.target_interface;
    j["targets"] = ref.targets;
    return j;
}

}  // namespace

SubgraphCache::SubgraphCache(const TwinGraph& graph) {
    for (const auto& [iface_name, iface] : graph.interfaces) {
        Subgraph sg;
        sg.interface = iface_name;
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& [inst_name, inst] : graph.instances) {
            if (inst.interface != iface_name) continue;
            SubgraphNode node;
            node.instance = inst_name;
            node.relationships = inst.relationships;
            nlohmann::json jn;
            jn["instance"] = inst_name;
            jn["relationships"] = nlohmann::json::array();
            for (const auto& ref : inst.relationships)
                jn["relationships"].push_back(relationship_json(ref));
            nodes.push_back(std::move(jn));
            sg.nodes.push_back(std::move(node));
        }
        nlohmann::json j;
        j["interface"] = iface_name;
        j["instances"] = std::move(nodes);
        sg.canonical = j.dump();  // nlohmann::json keeps keys sorted
        sg.size_bytes = sg.canonical.size();
        by_interface_.emplace(iface_name, std::move(sg));
    }
}

const Subgraph& SubgraphCache::get(const std::string& interface) const {
    auto it = by_interface_.find(interface);
    if (it == by_interface_.end()) throw ModelError("unknown interface '" + interface + "'");
    return it->second;
}

size_t SubgraphCache::total_bytes() const {
    size_t total = 0;
    for (const auto& [_, sg] : by_interface_) total += sg.size_bytes;
    return total;
}

}  // namespace ktwin
