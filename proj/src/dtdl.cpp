#include "ktwin/dtdl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ktwin {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
    throw ResourceError(origin + ": " + msg);
}

// displayName / description may be a plain string or a localization map.
std::string localized_text(const json& node) {
    if (node.is_string()) return node.get<std::string>();
    if (node.is_object()) {
        if (node.contains("en") && node["en"].is_string()) return node["en"].get<std::string>();
        for (const auto& [_, v] : node.items())
            if (v.is_string()) return v.get<std::string>();
    }
    return {};
}

bool has_type(const json& node, const std::string& type) {
    if (!node.contains("@type")) return false;
    const json& t = node["@type"];
    if (t.is_string()) return t.get<std::string>() == type;
    if (t.is_array())
        return std::any_of(t.begin(), t.end(),
                           [&](const json& e) { return e.is_string() && e.get<std::string>() == type; });
    return false;
}

std::string content_type(const json& node) {
    if (!node.contains("@type")) return {};
    const json& t = node["@type"];
    if (t.is_string()) return t.get<std::string>();
    if (t.is_array() && !t.empty() && t[0].is_string()) return t[0].get<std::string>();
    return {};
}

Schema map_primitive_schema(const std::string& origin, const std::string& name,
                            const std::string& dtdl_schema) {
    if (dtdl_schema == "double" || dtdl_schema == "float") return Schema::Float;
    if (dtdl_schema == "integer" || dtdl_schema == "long") return Schema::Integer;
    if (dtdl_schema == "boolean") return Schema::Boolean;
    if (dtdl_schema == "string" || dtdl_schema == "dateTime" || dtdl_schema == "date" ||
        dtdl_schema == "time" || dtdl_schema == "duration")
        return Schema::String;
    fail(origin, "property '" + name + "': unsupported schema '" + dtdl_schema + "'");
}

Property import_property(const std::string& origin, const json& node) {
    Property p;
    if (!node.contains("name") || !node["name"].is_string())
        fail(origin, "Property content without a name");
    p.name = node["name"].get<std::string>();
    if (node.contains("description")) p.description = localized_text(node["description"]);
    if (!node.contains("schema")) fail(origin, "property '" + p.name + "' has no schema");
    const json& schema = node["schema"];
    if (schema.is_string()) {
        p.schema = map_primitive_schema(origin, p.name, schema.get<std::string>());
    } else if (schema.is_object() && has_type(schema, "Enum")) {
        p.schema = Schema::Enumeration;
        if (!schema.contains("enumValues") || !schema["enumValues"].is_array())
            fail(origin, "enum property '" + p.name + "' has no enumValues");
        for (const json& ev : schema["enumValues"]) {
            if (!ev.contains("name") || !ev["name"].is_string())
                fail(origin, "enum property '" + p.name + "' has an unnamed enumValue");
            p.enum_values.push_back(ev["name"].get<std::string>());
        }
        if (p.enum_values.empty()) fail(origin, "enum property '" + p.name + "' has no values");
    } else {
        fail(origin, "property '" + p.name + "': complex schemas are not supported");
    }
    return p;
}

RelationshipDef import_relationship(const std::string& origin, const json& node) {
    RelationshipDef r;
    if (!node.contains("name") || !node["name"].is_string())
        fail(origin, "Relationship content without a name");
    r.name = node["name"].get<std::string>();
    if (node.contains("description")) r.description = localized_text(node["description"]);
    if (!node.contains("target") || !node["target"].is_string())
        fail(origin, "relationship '" + r.name + "' has no target interface");
    r.target = dtmi_to_name(node["target"].get<std::string>());
    // DTDL relationships are unbounded unless maxMultiplicity caps them at 1.
    r.multiplicity = Multiplicity::Many;
    if (node.contains("maxMultiplicity") && node["maxMultiplicity"].is_number_integer() &&
        node["maxMultiplicity"].get<int64_t>() == 1)
        r.multiplicity = Multiplicity::One;
    return r;
}

CommandDef import_command(const std::string& origin, const json& node) {
    CommandDef c;
    if (!node.contains("name") || !node["name"].is_string())
        fail(origin, "Command content without a name");
    c.name = node["name"].get<std::string>();
    if (node.contains("description")) c.description = localized_text(node["description"]);
    if (node.contains("request")) c.payload_schema = "json";
    return c;
}

TwinInterface import_interface(const std::string& origin, const json& doc,
                               bool permissive, std::vector<std::string>& warnings) {
    if (!doc.is_object()) fail(origin, "DTDL document must be a JSON object");
    if (!has_type(doc, "Interface")) fail(origin, "DTDL document is not an Interface");
    if (!doc.contains("@id") || !doc["@id"].is_string())
        fail(origin, "DTDL interface without an @id");

    TwinInterface iface;
    iface.name = dtmi_to_name(doc["@id"].get<std::string>());
    if (doc.contains("description"))
        iface.description = localized_text(doc["description"]);
    else if (doc.contains("displayName"))
        iface.description = localized_text(doc["displayName"]);

    if (doc.contains("extends")) {
        const json& ext = doc["extends"];
        if (ext.is_string()) {
            iface.parent = dtmi_to_name(ext.get<std::string>());
        } else if (ext.is_array() && ext.size() == 1 && ext[0].is_string()) {
            iface.parent = dtmi_to_name(ext[0].get<std::string>());
        } else {
            fail(origin, "interface '" + iface.name + "': only single inheritance is supported");
        }
    }

    if (doc.contains("contents")) {
        if (!doc["contents"].is_array())
            fail(origin, "interface '" + iface.name + "': contents must be an array");
        for (const json& entry : doc["contents"]) {
            const std::string type = content_type(entry);
            if (type == "Property") {
                iface.properties.push_back(import_property(origin, entry));
            } else if (type == "Relationship") {
                iface.relationships.push_back(import_relationship(origin, entry));
            } else if (type == "Command") {
                iface.commands.push_back(import_command(origin, entry));
            } else if (permissive) {
                warnings.push_back(origin + ": interface '" + iface.name + "': skipped unsupported " +
                                   (type.empty() ? "untyped" : type) + " content");
            } else {
                fail(origin, "interface '" + iface.name + "': unsupported content type '" + type +
                                 "' (Telemetry and Component are not convertible)");
            }
        }
    }
    return iface;
}

}  // namespace

std::string dtmi_to_name(const std::string& dtmi) {
    constexpr const char* kPrefix = "dtmi:";
    if (dtmi.rfind(kPrefix, 0) != 0)
        throw ResourceError("identifier '" + dtmi + "' is not a dtmi");
    std::string body = dtmi.substr(5);
    if (const size_t semi = body.find(';'); semi != std::string::npos) body.resize(semi);
    if (body.empty()) throw ResourceError("identifier '" + dtmi + "' has an empty path");
    std::string out;
    out.reserve(body.size());
    for (char ch : body) {
        if (ch == ':' || ch == '_')
            out.push_back('-');
        else
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

DtdlImport import_dtdl(const std::string& json_text, const std::string& origin, bool permissive) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ResourceError(origin + ": " + e.what());
    }

    DtdlImport out;
    std::set<std::string> ids;
    auto take = [&](const json& doc) {
        TwinInterface iface = import_interface(origin, doc, permissive, out.warnings);
        if (!ids.insert(iface.name).second)
            fail(origin, "duplicate interface id maps to '" + iface.name + "'");
        out.resources.interfaces.push_back(std::move(iface));
    };
    if (root.is_array())
        for (const json& doc : root) take(doc);
    else
        take(root);
    return out;
}

DtdlImport import_dtdl_files(const std::vector<std::string>& paths, bool permissive) {
    DtdlImport all;
    std::set<std::string> ids;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw ResourceError(path + ": cannot open file");
        std::ostringstream buf;
        buf << in.rdbuf();
        DtdlImport one = import_dtdl(buf.str(), path, permissive);
        for (auto& iface : one.resources.interfaces) {
            if (!ids.insert(iface.name).second)
                fail(path, "duplicate interface id maps to '" + iface.name + "'");
            all.resources.interfaces.push_back(std::move(iface));
        }
        for (auto& w : one.warnings) all.warnings.push_back(std::move(w));
    }
    return all;
}

}  // namespace ktwin
