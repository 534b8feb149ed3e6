#include "ktwin/handlers.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace ktwin {

using nlohmann::json;

// ---- Air quality index -----------------------------------------------------

AqiTables default_aqi_tables() {
    AqiTables t;
    t.co = {"co", 1, {{0.0, 4.4, 0, 50},
                      {4.5, 9.4, 51, 100},
                      {9.5, 12.4, 101, 150},
                      {12.5, 15.4, 151, 200},
                      {15.5, 30.4, 201, 300},
                      {30.5, 40.4, 301, 400},
                      {40.5, 50.4, 401, 500}}};
    t.so2 = {"so2", 0, {{0, 35, 0, 50},
                        {36, 75, 51, 100},
                        {76, 185, 101, 150},
                        {186, 304, 151, 200},
                        {305, 604, 201, 300},
                        {605, 804, 301, 400},
                        {805, 1004, 401, 500}}};
    // CO2 has no standard index; synthetic bands, shipped as configuration.
    t.co2 = {"co2", 0, {{0, 600, 0, 50},
                        {601, 1000, 51, 100},
                        {1001, 1500, 101, 150},
                        {1501, 2500, 151, 200},
                        {2501, 5000, 201, 300},
                        {5001, 40000, 301, 500}}};
    return t;
}

const char* aqi_category(int index) {
    if (index <= 50) return "good";
    if (index <= 100) return "moderate";
    if (index <= 150) return "unhealthy-sensitive";
    if (index <= 200) return "unhealthy";
    if (index <= 300) return "very-unhealthy";
    return "hazardous";
}

namespace {

double truncate_to(double c, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return std::floor(c * scale) / scale;
}

// Returns the sub-index and whether the reading exceeded the table.
std::pair<int, bool> sub_index(const PollutantTable& table, double c) {
    if (c < 0) c = 0;
    c = truncate_to(c, table.decimals);
    if (c > table.rows.back().c_hi) return {500, true};
    for (const auto& row : table.rows) {
        if (c < row.c_lo || c > row.c_hi) continue;
        const double x =
            (row.i_hi - row.i_lo) / (row.c_hi - row.c_lo) * (c - row.c_lo) + row.i_lo;
        return {static_cast<int>(std::floor(x + 0.5)), false};
    }
    // Truncation to table precision closes inter-row gaps; reaching here
    // means a malformed configuration table.
    throw ModelError("breakpoint table gap for pollutant '" + table.pollutant + "'");
}

}  // namespace

AqiResult classify_aqi(double co2, double co, double so2, const AqiTables& tables) {
    const auto a = sub_index(tables.co2, co2);
    const auto b = sub_index(tables.co, co);
    const auto c = sub_index(tables.so2, so2);
    AqiResult r;
    r.index = std::max(a.first, std::max(b.first, c.first));
    r.category = aqi_category(r.index);
    r.clamped = a.second || b.second || c.second;
    return r;
}

// ---- Weather enrichment ----------------------------------------------------

std::optional<double> dew_point(double temp_c, double humidity_pct) {
    if (humidity_pct <= 0.0) return std::nullopt;
    constexpr double b = 17.62;
    constexpr double c = 243.12;
    const double gamma = std::log(humidity_pct / 100.0) + b * temp_c / (c + temp_c);
    return c * gamma / (b - gamma);
}

double feels_like(double temp_c, double humidity_pct, double wind_kmh) {
    if (temp_c < 10.0 && wind_kmh > 4.8) {
        const double v16 = std::pow(wind_kmh, 0.16);
        return 13.12 + 0.6215 * temp_c - 11.37 * v16 + 0.3965 * temp_c * v16;
    }
    if (temp_c > 27.0 && humidity_pct > 40.0) {
        const double t = temp_c * 9.0 / 5.0 + 32.0;
        const double rh = humidity_pct;
        const double hi = -42.379 + 2.04901523 * t + 10.14333127 * rh - 0.22475541 * t * rh -
                          6.83783e-3 * t * t - 5.481717e-2 * rh * rh + 1.22874e-3 * t * t * rh +
                          8.5282e-4 * t * rh * rh - 1.99e-6 * t * t * rh * rh;
        return (hi - 32.0) * 5.0 / 9.0;
    }
    return temp_c;
}

const char* tendency_name(Tendency t) {
    switch (t) {
        case Tendency::Rising: return "rising";
        case Tendency::Steady: return "steady";
        case Tendency::Falling: return "falling";
    }
    return "steady";
}

double pressure_slope_per_hour(const std::vector<std::pair<double, double>>& samples) {
    const size_t n = samples.size();
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (const auto& [t, p] : samples) {
        mx += t;
        my += p;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [t, p] : samples) {
        sxx += (t - mx) * (t - mx);
        sxy += (t - mx) * (p - my);
    }
    if (sxx == 0.0) return 0.0;
    // One virtual hour is 60 virtual seconds under the run's 24h -> 24min
    // time compression.
    return sxy / sxx * 60.0;
}

Tendency pressure_tendency(const std::vector<std::pair<double, double>>& samples) {
    const double slope = pressure_slope_per_hour(samples);
    if (slope > 0.1) return Tendency::Rising;
    if (slope < -0.1) return Tendency::Falling;
    return Tendency::Steady;
}

// ---- Handler runtime -------------------------------------------------------

ReverseAdjacency build_reverse_adjacency(const TwinGraph& graph) {
    ReverseAdjacency rev;
    for (const auto& [source, refs] : graph.adjacency)
        for (const auto& ref : refs)
            for (const auto& target : ref.targets) rev[target].push_back(source);
    for (auto& [_, sources] : rev) std::sort(sources.begin(), sources.end());
    return rev;
}

std::string HandlerContext::forward_target(const std::string& target_interface) const {
    return graph->related_target(instance, target_interface);
}

std::vector<std::string> HandlerContext::related_sources(
    const std::string& source_interface) const {
    std::vector<std::string> out;
    if (!reverse) return out;
    auto it = reverse->find(instance);
    if (it == reverse->end()) return out;
    for (const auto& source : it->second) {
        const TwinInstance* inst = graph->find_instance(source);
        if (inst && inst->interface == source_interface) out.push_back(source);
    }
    return out;
}

namespace {

struct HandlerFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Emission store_emission(const HandlerContext& ctx, const json& payload) {
    return {EventCategory::Store, ctx.interface, ctx.instance, "", payload.dump()};
}

Emission virtual_emission(const HandlerContext& ctx, const json& payload) {
    return {EventCategory::Virtual, ctx.interface, ctx.instance, "", payload.dump()};
}

// Commands may only travel along the emitter's own relationships, to a
// command the target interface actually declares.
Emission command_emission(const HandlerContext& ctx, const std::string& target_interface,
                          const std::string& target_instance, const std::string& command,
                          const json& payload) {
    const TwinInterface* iface = ctx.graph->find_interface(target_interface);
    if (!iface) throw HandlerFailure("command targets unknown interface '" + target_interface + "'");
    const bool declared = std::any_of(iface->commands.begin(), iface->commands.end(),
                                      [&](const CommandDef& c) { return c.name == command; });
    if (!declared)
        throw HandlerFailure("interface '" + target_interface + "' declares no command '" +
                             command + "'");
    const TwinInstance* inst = ctx.graph->find_instance(target_instance);
    if (!inst || inst->interface != target_interface)
        throw HandlerFailure("command targets unknown instance '" + target_instance + "'");
    // Reachability: the target must be one of the emitter's relationship targets.
    bool reachable = false;
    if (auto it = ctx.graph->adjacency.find(ctx.instance); it != ctx.graph->adjacency.end())
        for (const auto& ref : it->second)
            for (const auto& t : ref.targets)
                if (t == target_instance) reachable = true;
    if (!reachable)
        throw HandlerFailure("command target '" + target_instance +
                             "' is not related to emitter '" + ctx.instance + "'");
    return {EventCategory::Command, target_interface, target_instance, command, payload.dump()};
}

json parse_payload(const std::string& payload) {
    json j = json::parse(payload, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw HandlerFailure("malformed payload");
    return j;
}

double require_number(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number())
        throw HandlerFailure(std::string("payload missing numeric field '") + field + "'");
    return j[field].get<double>();
}

std::string require_string(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_string())
        throw HandlerFailure(std::string("payload missing string field '") + field + "'");
    return j[field].get<std::string>();
}

// -- built-in handlers --

HandlerResult handle_airquality(const json& p, const HandlerContext& ctx) {
    const double co2 = require_number(p, "co2");
    const double co = require_number(p, "co");
    const double so2 = require_number(p, "so2");
    if (co2 < 0 || co < 0 || so2 < 0) throw HandlerFailure("negative pollutant density");
    const AqiResult aqi = classify_aqi(co2, co, so2, default_aqi_tables());

    HandlerResult out;
    json stored = {{"co2", co2},       {"co", co},
                   {"so2", so2},       {"index", aqi.index},
                   {"category", aqi.category}, {"clamped", aqi.clamped}};
    out.emissions.push_back(store_emission(ctx, stored));

    const std::string pole = ctx.forward_target("city-pole");
    if (pole.empty()) throw HandlerFailure("sensor '" + ctx.instance + "' has no pole");
    json cmd = {{"index", aqi.index}, {"category", aqi.category}, {"origin", ctx.instance}};
    out.emissions.push_back(
        command_emission(ctx, "city-pole", pole, "updateairqualityindex", cmd));
    return out;
}

HandlerResult handle_pole(const json& p, const HandlerContext& ctx) {
    const double index = require_number(p, "index");
    const std::string category = require_string(p, "category");
    const std::string neighborhood = ctx.forward_target("s4city-city-neighborhood");
    if (neighborhood.empty())
        throw HandlerFailure("pole '" + ctx.instance + "' has no neighborhood");
    HandlerResult out;
    json cmd = {{"index", index}, {"category", category}, {"pole", ctx.instance}};
    out.emissions.push_back(command_emission(ctx, "s4city-city-neighborhood", neighborhood,
                                             "updateairqualityindex", cmd));
    return out;
}

HandlerResult handle_neighborhood(const json& p, const HandlerContext& ctx) {
    const double index = require_number(p, "index");
    const std::string pole = require_string(p, "pole");

    // Per-pole reports live in the neighborhood's own stored state; entries
    // older than the sliding window fall out of the max.
    json reports = json::object();
    if (auto latest = ctx.store->latest(ctx.interface, ctx.instance)) {
        json prev = json::parse(latest->payload, nullptr, false);
        if (prev.is_object() && prev.contains("reports") && prev["reports"].is_object())
            reports = prev["reports"];
    }
    json pruned = json::object();
    for (const auto& [name, entry] : reports.items()) {
        if (!entry.is_object() || !entry.contains("time")) continue;
        if (entry["time"].get<double>() > ctx.now - ctx.aqi_window) pruned[name] = entry;
    }
    pruned[pole] = {{"index", index}, {"time", ctx.now}};

    int worst = 0;
    for (const auto& [_, entry] : pruned.items())
        worst = std::max(worst, static_cast<int>(entry["index"].get<double>()));
    const bool warning = worst >= 151;

    HandlerResult out;
    json stored = {{"index", worst},
                   {"category", aqi_category(worst)},
                   {"warning", warning},
                   {"reports", pruned}};
    out.emissions.push_back(store_emission(ctx, stored));
    return out;
}

HandlerResult handle_weather(const json& p, const HandlerContext& ctx) {
    const double temp = require_number(p, "temperature");
    const double humidity = require_number(p, "relativeHumidity");
    const double pressure = require_number(p, "atmosphericPressure");
    const double wind_speed = require_number(p, "windSpeed");
    if (humidity < 0 || humidity > 100) throw HandlerFailure("humidity out of range");
    if (pressure <= 0) throw HandlerFailure("non-positive pressure");

    // Tendency looks back over this station's own stored history.
    std::vector<std::pair<double, double>> samples;
    RangePage history = ctx.store->range(ctx.interface, ctx.instance,
                                         ctx.now - ctx.pressure_window, ctx.now, 0);
    for (const auto& ev : history.events) {
        json prev = json::parse(ev.payload, nullptr, false);
        if (prev.is_object() && prev.contains("atmosphericPressure") &&
            prev["atmosphericPressure"].is_number())
            samples.emplace_back(ev.time, prev["atmosphericPressure"].get<double>());
    }
    samples.emplace_back(ctx.now, pressure);

    json stored = p;
    if (auto dew = dew_point(temp, humidity))
        stored["dewPoint"] = *dew;
    else
        stored["dewPoint"] = nullptr;
    stored["feelsLike"] = feels_like(temp, humidity, wind_speed);
    stored["pressureTendency"] = tendency_name(pressure_tendency(samples));

    HandlerResult out;
    out.emissions.push_back(store_emission(ctx, stored));
    return out;
}

// Streetlight, crowd-flow and traffic-flow services enrich nothing; they
// validate shape and persist the reading.
HandlerResult handle_passthrough(const json& p, const HandlerContext& ctx) {
    HandlerResult out;
    out.emissions.push_back(store_emission(ctx, p));
    return out;
}

HandlerResult handle_device(const json& p, const HandlerContext& ctx) {
    const double level = require_number(p, "batteryLevel");
    if (level < 0 || level > 100) throw HandlerFailure("battery level out of range");
    const bool low = level < ctx.battery_threshold;
    HandlerResult out;
    out.emissions.push_back(store_emission(ctx, json{{"batteryLevel", level}, {"low", low}}));
    if (low)
        out.emissions.push_back(
            virtual_emission(ctx, json{{"action", "recharge"}, {"batteryLevel", level}}));
    return out;
}

HandlerResult handle_parkingspot(const json& p, const HandlerContext& ctx) {
    const std::string status = require_string(p, "status");
    if (status != "free" && status != "occupied" && status != "closed")
        throw HandlerFailure("unknown spot status '" + status + "'");
    const std::string parking = ctx.forward_target("ngsi-ld-city-offstreetparking");
    if (parking.empty())
        throw HandlerFailure("spot '" + ctx.instance + "' belongs to no parking");
    HandlerResult out;
    json cmd = {{"spot", ctx.instance}, {"status", status}};
    out.emissions.push_back(command_emission(ctx, "ngsi-ld-city-offstreetparking", parking,
                                             "updatevehiclecount", cmd));
    return out;
}

HandlerResult handle_offstreetparking(const json& p, const HandlerContext& ctx) {
    const std::string spot = require_string(p, "spot");
    const std::string status = require_string(p, "status");

    json spots = json::object();
    if (auto latest = ctx.store->latest(ctx.interface, ctx.instance)) {
        json prev = json::parse(latest->payload, nullptr, false);
        if (prev.is_object() && prev.contains("spots") && prev["spots"].is_object())
            spots = prev["spots"];
    }
    spots[spot] = status;

    const size_t total = ctx.related_sources("ngsi-ld-city-parkingspot").size();
    size_t occupied = 0, closed = 0;
    for (const auto& [_, s] : spots.items()) {
        if (s == "occupied") occupied++;
        if (s == "closed") closed++;
    }
    const int64_t available =
        static_cast<int64_t>(total) - static_cast<int64_t>(occupied) - static_cast<int64_t>(closed);

    HandlerResult out;
    json stored = {{"available", available}, {"occupied", occupied},
                   {"closed", closed},       {"total", total},
                   {"spots", spots}};
    out.emissions.push_back(store_emission(ctx, stored));
    return out;
}

}  // namespace

bool known_handler(const std::string& handler_id) {
    return handler_id == "airquality" || handler_id == "pole" || handler_id == "neighborhood" ||
           handler_id == "weather" || handler_id == "streetlight" || handler_id == "crowdflow" ||
           handler_id == "trafficflow" || handler_id == "device" ||
           handler_id == "parkingspot" || handler_id == "offstreetparking";
}

HandlerResult run_handler(const std::string& handler_id, const std::string& payload,
                          const HandlerContext& ctx) {
    try {
        const json p = parse_payload(payload);
        if (handler_id == "airquality") return handle_airquality(p, ctx);
        if (handler_id == "pole") return handle_pole(p, ctx);
        if (handler_id == "neighborhood") return handle_neighborhood(p, ctx);
        if (handler_id == "weather") return handle_weather(p, ctx);
        if (handler_id == "streetlight" || handler_id == "crowdflow" ||
            handler_id == "trafficflow")
            return handle_passthrough(p, ctx);
        if (handler_id == "device") return handle_device(p, ctx);
        if (handler_id == "parkingspot") return handle_parkingspot(p, ctx);
        if (handler_id == "offstreetparking") return handle_offstreetparking(p, ctx);
        HandlerResult out;
        out.failed = true;
        out.error = "unknown handler '" + handler_id + "'";
        return out;
    } catch (const HandlerFailure& e) {
        HandlerResult out;
        out.failed = true;
        out.error = e.what();
        return out;
    }
}

}  // namespace ktwin
