#include "ktwin/resources.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace ktwin {

namespace {

struct Ctx {
    std::string origin;

    [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
        std::ostringstream os;
        os << origin << ":" << (node.Mark().line + 1) << ": " << msg;
        throw ResourceError(os.str());
    }

    void expect_map(const YAML::Node& node, const std::string& what) const {
        if (!node || !node.IsMap()) fail(node, what + " must be a mapping");
    }

    void expect_seq(const YAML::Node& node, const std::string& what) const {
        if (!node.IsSequence()) fail(node, what + " must be a sequence");
    }

    // Strictness: every key of `node` must be in `allowed`.
    void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                    const std::string& what) const {
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown field '" + key + "' in " + what);
        }
    }

    std::string str(const YAML::Node& node, const std::string& what) const {
        if (!node || !node.IsScalar()) fail(node, what + " must be a string");
        return node.as<std::string>();
    }

    std::string req_str(const YAML::Node& parent, const char* key, const std::string& what) const {
        YAML::Node n = parent[key];
        if (!n) fail(parent, what + " is missing required field '" + std::string(key) + "'");
        return str(n, what + "." + key);
    }

    double num(const YAML::Node& node, const std::string& what) const {
        if (!node || !node.IsScalar()) fail(node, what + " must be a number");
        try {
            return node.as<double>();
        } catch (const YAML::Exception&) {
            fail(node, what + " must be a number");
        }
    }

    int64_t integer(const YAML::Node& node, const std::string& what) const {
        if (!node || !node.IsScalar()) fail(node, what + " must be an integer");
        try {
            return node.as<int64_t>();
        } catch (const YAML::Exception&) {
            fail(node, what + " must be an integer");
        }
    }

    bool boolean(const YAML::Node& node, const std::string& what) const {
        if (!node || !node.IsScalar()) fail(node, what + " must be a boolean");
        try {
            return node.as<bool>();
        } catch (const YAML::Exception&) {
            fail(node, what + " must be a boolean");
        }
    }
};

Property parse_property(const Ctx& ctx, const YAML::Node& node) {
    ctx.expect_map(node, "property");
    ctx.check_keys(node, {"name", "description", "schema", "values"}, "property");
    Property p;
    p.name = ctx.req_str(node, "name", "property");
    if (node["description"]) p.description = ctx.str(node["description"], "property.description");
    const std::string schema = ctx.req_str(node, "schema", "property '" + p.name + "'");
    if (auto parsed = parse_schema(schema))
        p.schema = *parsed;
    else
        ctx.fail(node["schema"], "unknown schema '" + schema + "'");
    if (node["values"]) {
        if (p.schema != Schema::Enumeration)
            ctx.fail(node["values"], "property '" + p.name + "' lists values but is not an enumeration");
        ctx.expect_seq(node["values"], "property.values");
        for (const auto& v : node["values"]) p.enum_values.push_back(ctx.str(v, "enumeration value"));
        if (p.enum_values.empty()) ctx.fail(node["values"], "enumeration '" + p.name + "' has no values");
    } else if (p.schema == Schema::Enumeration) {
        ctx.fail(node, "enumeration property '" + p.name + "' requires a values list");
    }
    return p;
}

RelationshipDef parse_relationship_def(const Ctx& ctx, const YAML::Node& node) {
    ctx.expect_map(node, "relationship");
    ctx.check_keys(node, {"name", "description", "target", "multiplicity"}, "relationship");
    RelationshipDef r;
    r.name = ctx.req_str(node, "name", "relationship");
    if (node["description"]) r.description = ctx.str(node["description"], "relationship.description");
    r.target = ctx.req_str(node, "target", "relationship '" + r.name + "'");
    if (node["multiplicity"]) {
        const std::string m = ctx.str(node["multiplicity"], "relationship.multiplicity");
        if (m == "one")
            r.multiplicity = Multiplicity::One;
        else if (m == "many")
            r.multiplicity = Multiplicity::Many;
        else
            ctx.fail(node["multiplicity"], "multiplicity must be 'one' or 'many', got '" + m + "'");
    }
    return r;
}

CommandDef parse_command_def(const Ctx& ctx, const YAML::Node& node) {
    ctx.expect_map(node, "command");
    ctx.check_keys(node, {"name", "description", "payload"}, "command");
    CommandDef c;
    c.name = ctx.req_str(node, "name", "command");
    if (node["description"]) c.description = ctx.str(node["description"], "command.description");
    if (node["payload"]) c.payload_schema = ctx.str(node["payload"], "command.payload");
    return c;
}

AutoscalePolicy parse_autoscale(const Ctx& ctx, const YAML::Node& node) {
    ctx.expect_map(node, "autoscale");
    ctx.check_keys(node, {"metric", "target", "min", "max"}, "autoscale");
    AutoscalePolicy a;
    if (node["metric"]) a.metric = ctx.str(node["metric"], "autoscale.metric");
    if (a.metric != "concurrency") ctx.fail(node, "unsupported autoscale metric '" + a.metric + "'");
    if (node["target"]) a.target = static_cast<int>(ctx.integer(node["target"], "autoscale.target"));
    if (node["min"]) a.min_replicas = static_cast<int>(ctx.integer(node["min"], "autoscale.min"));
    if (node["max"]) a.max_replicas = static_cast<int>(ctx.integer(node["max"], "autoscale.max"));
    if (a.target <= 0) ctx.fail(node, "autoscale.target must be positive");
    if (a.min_replicas < 0) ctx.fail(node, "autoscale.min must be >= 0");
    if (a.max_replicas < std::max(1, a.min_replicas))
        ctx.fail(node, "autoscale.max must be >= max(1, min)");
    return a;
}

ServiceSettings parse_service(const Ctx& ctx, const YAML::Node& node) {
    ctx.expect_map(node, "service");
    ctx.check_keys(node, {"handler", "cpu", "memoryMiB", "autoscale"}, "service");
    ServiceSettings s;
    s.handler = ctx.req_str(node, "handler", "service");
    if (node["cpu"]) s.cpu = ctx.num(node["cpu"], "service.cpu");
    if (node["memoryMiB"]) {
        const int64_t mib = ctx.integer(node["memoryMiB"], "service.memoryMiB");
        if (mib <= 0) ctx.fail(node, "service.memoryMiB must be positive");
        s.memory_mib = static_cast<uint64_t>(mib);
    }
    if (node["autoscale"]) s.autoscale = parse_autoscale(ctx, node["autoscale"]);
    if (s.cpu <= 0) ctx.fail(node, "service.cpu must be positive");
    return s;
}

RoutingSettings parse_routing(const Ctx& ctx, const YAML::Node& node) {
    ctx.expect_map(node, "routing");
    ctx.check_keys(node, {"persistRealDirectly", "persistStoreEvents"}, "routing");
    RoutingSettings r;
    if (node["persistRealDirectly"])
        r.persist_real_directly = ctx.boolean(node["persistRealDirectly"], "routing.persistRealDirectly");
    if (node["persistStoreEvents"])
        r.persist_store_events = ctx.boolean(node["persistStoreEvents"], "routing.persistStoreEvents");
    return r;
}

TwinInterface parse_interface(const Ctx& ctx, const YAML::Node& meta, const YAML::Node& spec) {
    TwinInterface iface;
    iface.name = ctx.req_str(meta, "name", "metadata");
    if (spec) {
        ctx.expect_map(spec, "spec");
        ctx.check_keys(spec,
                       {"parent", "description", "properties", "relationships", "commands",
                        "service", "routing"},
                       "TwinInterface spec");
        if (spec["parent"]) iface.parent = ctx.str(spec["parent"], "spec.parent");
        if (spec["description"]) iface.description = ctx.str(spec["description"], "spec.description");
        if (spec["properties"]) {
            ctx.expect_seq(spec["properties"], "spec.properties");
            for (const auto& n : spec["properties"]) iface.properties.push_back(parse_property(ctx, n));
        }
        if (spec["relationships"]) {
            ctx.expect_seq(spec["relationships"], "spec.relationships");
            for (const auto& n : spec["relationships"])
                iface.relationships.push_back(parse_relationship_def(ctx, n));
        }
        if (spec["commands"]) {
            ctx.expect_seq(spec["commands"], "spec.commands");
            for (const auto& n : spec["commands"]) iface.commands.push_back(parse_command_def(ctx, n));
        }
        if (spec["service"]) iface.service = parse_service(ctx, spec["service"]);
        if (spec["routing"]) iface.routing = parse_routing(ctx, spec["routing"]);
    }
    return iface;
}

PropertyValue parse_property_value(const Ctx& ctx, const YAML::Node& node) {
    if (!node.IsScalar()) ctx.fail(node, "instance property values must be scalars");
    // YAML scalars are untyped text; recover the most specific type.
    try {
        if (node.Tag() != "!") {  // unquoted
            const std::string raw = node.as<std::string>();
            if (raw == "true" || raw == "false") return node.as<bool>();
            if (!raw.empty() && raw.find_first_not_of("+-0123456789") == std::string::npos)
                return node.as<int64_t>();
            if (!raw.empty() && raw.find_first_not_of("+-0123456789.eE") == std::string::npos &&
                raw.find_first_of("0123456789") != std::string::npos)
                return node.as<double>();
        }
    } catch (const YAML::Exception&) {
        // fall through to string
    }
    return node.as<std::string>();
}

TwinInstance parse_instance(const Ctx& ctx, const YAML::Node& meta, const YAML::Node& spec) {
    TwinInstance inst;
    inst.name = ctx.req_str(meta, "name", "metadata");
    ctx.expect_map(spec, "spec");
    ctx.check_keys(spec, {"interface", "properties", "relationships"}, "TwinInstance spec");
    inst.interface = ctx.req_str(spec, "interface", "TwinInstance spec");
    if (spec["properties"]) {
        ctx.expect_map(spec["properties"], "spec.properties");
        for (const auto& kv : spec["properties"]) {
            const std::string key = kv.first.as<std::string>();
            inst.properties[key] = parse_property_value(ctx, kv.second);
        }
    }
    if (spec["relationships"]) {
        ctx.expect_seq(spec["relationships"], "spec.relationships");
        for (const auto& n : spec["relationships"]) {
            ctx.expect_map(n, "instance relationship");
            ctx.check_keys(n, {"name", "targets"}, "instance relationship");
            RelationshipRef ref;
            ref.name = ctx.req_str(n, "name", "instance relationship");
            YAML::Node targets = n["targets"];
            if (!targets) ctx.fail(n, "instance relationship '" + ref.name + "' requires targets");
            ctx.expect_seq(targets, "relationship targets");
            for (const auto& t : targets) ref.targets.push_back(ctx.str(t, "relationship target"));
            inst.relationships.push_back(std::move(ref));
        }
    }
    return inst;
}

}  // namespace

ResourceSet parse_definitions(const std::string& text, const std::string& origin) {
    Ctx ctx{origin};
    ResourceSet out;
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAll(text);
    } catch (const YAML::Exception& e) {
        throw ResourceError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    for (const auto& doc : docs) {
        if (!doc || doc.IsNull()) continue;  // allow empty documents between separators
        ctx.expect_map(doc, "resource document");
        ctx.check_keys(doc, {"kind", "metadata", "spec"}, "resource document");
        const std::string kind = ctx.req_str(doc, "kind", "resource document");
        YAML::Node meta = doc["metadata"];
        ctx.expect_map(meta, "metadata");
        ctx.check_keys(meta, {"name"}, "metadata");
        if (kind == "TwinInterface") {
            out.interfaces.push_back(parse_interface(ctx, meta, doc["spec"]));
        } else if (kind == "TwinInstance") {
            if (!doc["spec"]) ctx.fail(doc, "TwinInstance requires a spec");
            out.instances.push_back(parse_instance(ctx, meta, doc["spec"]));
        } else {
            ctx.fail(doc["kind"], "unknown resource kind '" + kind + "'");
        }
    }
    return out;
}

ResourceSet load_resource_files(const std::vector<std::string>& paths) {
    ResourceSet all;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw ResourceError(path + ": cannot open file");
        std::ostringstream buf;
        buf << in.rdbuf();
        ResourceSet one = parse_definitions(buf.str(), path);
        for (auto& i : one.interfaces) all.interfaces.push_back(std::move(i));
        for (auto& i : one.instances) all.instances.push_back(std::move(i));
    }
    return all;
}

namespace {

void emit_interface(YAML::Emitter& out, const TwinInterface& iface) {
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << "TwinInterface";
    out << YAML::Key << "metadata" << YAML::Value << YAML::BeginMap << YAML::Key << "name"
        << YAML::Value << iface.name << YAML::EndMap;
    out << YAML::Key << "spec" << YAML::Value << YAML::BeginMap;
    if (!iface.parent.empty()) out << YAML::Key << "parent" << YAML::Value << iface.parent;
    if (!iface.description.empty())
        out << YAML::Key << "description" << YAML::Value << iface.description;
    if (!iface.properties.empty()) {
        out << YAML::Key << "properties" << YAML::Value << YAML::BeginSeq;
        for (const auto& p : iface.properties) {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << p.name;
            if (!p.description.empty()) out << YAML::Key << "description" << YAML::Value << p.description;
            out << YAML::Key << "schema" << YAML::Value << schema_name(p.schema);
            if (!p.enum_values.empty()) {
                out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (const auto& v : p.enum_values) out << v;
                out << YAML::EndSeq;
            }
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    if (!iface.relationships.empty()) {
        out << YAML::Key << "relationships" << YAML::Value << YAML::BeginSeq;
        for (const auto& r : iface.relationships) {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << r.name;
            if (!r.description.empty()) out << YAML::Key << "description" << YAML::Value << r.description;
            out << YAML::Key << "target" << YAML::Value << r.target;
            out << YAML::Key << "multiplicity" << YAML::Value
                << (r.multiplicity == Multiplicity::One ? "one" : "many");
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    if (!iface.commands.empty()) {
        out << YAML::Key << "commands" << YAML::Value << YAML::BeginSeq;
        for (const auto& c : iface.commands) {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << c.name;
            if (!c.description.empty()) out << YAML::Key << "description" << YAML::Value << c.description;
            if (!c.payload_schema.empty()) out << YAML::Key << "payload" << YAML::Value << c.payload_schema;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    if (iface.service) {
        out << YAML::Key << "service" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "handler" << YAML::Value << iface.service->handler;
        out << YAML::Key << "cpu" << YAML::Value << iface.service->cpu;
        out << YAML::Key << "memoryMiB" << YAML::Value << iface.service->memory_mib;
        out << YAML::Key << "autoscale" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "metric" << YAML::Value << iface.service->autoscale.metric;
        out << YAML::Key << "target" << YAML::Value << iface.service->autoscale.target;
        out << YAML::Key << "min" << YAML::Value << iface.service->autoscale.min_replicas;
        out << YAML::Key << "max" << YAML::Value << iface.service->autoscale.max_replicas;
        out << YAML::EndMap << YAML::EndMap;
    }
    out << YAML::Key << "routing" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "persistRealDirectly" << YAML::Value << iface.routing.persist_real_directly;
    out << YAML::Key << "persistStoreEvents" << YAML::Value << iface.routing.persist_store_events;
    out << YAML::EndMap;
    out << YAML::EndMap << YAML::EndMap;
}

void emit_instance(YAML::Emitter& out, const TwinInstance& inst) {
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << "TwinInstance";
    out << YAML::Key << "metadata" << YAML::Value << YAML::BeginMap << YAML::Key << "name"
        << YAML::Value << inst.name << YAML::EndMap;
    out << YAML::Key << "spec" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "interface" << YAML::Value << inst.interface;
    if (!inst.properties.empty()) {
        out << YAML::Key << "properties" << YAML::Value << YAML::BeginMap;
        for (const auto& [key, value] : inst.properties) {
            out << YAML::Key << key << YAML::Value;
            std::visit([&out](const auto& v) { out << v; }, value);
        }
        out << YAML::EndMap;
    }
    if (!inst.relationships.empty()) {
        out << YAML::Key << "relationships" << YAML::Value << YAML::BeginSeq;
        for (const auto& r : inst.relationships) {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << r.name;
            out << YAML::Key << "targets" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (const auto& t : r.targets) out << t;
            out << YAML::EndSeq << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap << YAML::EndMap;
}

}  // namespace

std::string emit_resources(const ResourceSet& set) {
    YAML::Emitter out;
    bool first = true;
    auto sep = [&] {
        if (!first) out << YAML::Newline;
        out << YAML::BeginDoc;
        first = false;
    };
    for (const auto& iface : set.interfaces) {
        sep();
        emit_interface(out, iface);
    }
    for (const auto& inst : set.instances) {
        sep();
        emit_instance(out, inst);
    }
    std::string text = out.c_str();
    text.push_back('\n');
    return text;
}

}  // namespace ktwin
