#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ktwin/model.hpp"
#include "ktwin/routing.hpp"
#include "ktwin/store.hpp"

namespace ktwin {

// ---- Air quality index -----------------------------------------------------

struct BreakpointRow {
    double c_lo, c_hi;
    int i_lo, i_hi;
};

struct PollutantTable {
    std::string pollutant;
    int decimals = 0;  // readings truncated to this many decimals before lookup
    std::vector<BreakpointRow> rows;
};

struct AqiTables {
    PollutantTable co2, co, so2;
};

// Default tables: CO (ppm) and SO2 (ppb) follow the common AQI breakpoint
// scheme; CO2 (ppm) has no standard index, so a documented synthetic table
// ships as configuration.
AqiTables default_aqi_tables();

struct AqiResult {
    int index = 0;
    std::string category;
    bool clamped = false;  // some reading exceeded the top breakpoint
};

const char* aqi_category(int index);

// Sub-index per pollutant via linear breakpoint interpolation (reading
// truncated to table precision, result rounded half away from zero); the
// overall index is the max. Above-table readings clamp to 500 and flag.
AqiResult classify_aqi(double co2, double co, double so2, const AqiTables& tables);

// ---- Weather enrichment ----------------------------------------------------

// Magnus dew point; absent when humidity is zero.
std::optional<double> dew_point(double temp_c, double humidity_pct);

// Wind chill below 10 °C with wind over 4.8 km/h, heat index above 27 °C with
// humidity over 40%, otherwise the air temperature.
double feels_like(double temp_c, double humidity_pct, double wind_kmh);

enum class Tendency { Rising, Steady, Falling };
const char* tendency_name(Tendency t);

// Least-squares slope over (virtual seconds, hPa) samples, expressed per
// virtual hour (60 virtual seconds).
double pressure_slope_per_hour(const std::vector<std::pair<double, double>>& samples);

// Sign of the slope with a ±0.1 hPa/h dead band.
Tendency pressure_tendency(const std::vector<std::pair<double, double>>& samples);

// ---- Handler runtime -------------------------------------------------------

struct Emission {
    EventCategory category = EventCategory::Store;
    std::string interface;  // command: target interface; store/virtual: own
    std::string instance;   // command: target instance; store/virtual: own
    std::string command;    // set when category == Command
    std::string payload;    // structured text body
};

struct HandlerResult {
    std::vector<Emission> emissions;
    bool failed = false;
    std::string error;
};

// instance -> instances whose relationships point at it
using ReverseAdjacency = std::map<std::string, std::vector<std::string>>;
ReverseAdjacency build_reverse_adjacency(const TwinGraph& graph);

struct HandlerContext {
    const TwinGraph* graph = nullptr;
    const SubgraphCache* subgraphs = nullptr;
    const ReverseAdjacency* reverse = nullptr;
    const EventStore* store = nullptr;
    std::string interface;  // handler's own interface
    std::string instance;   // twin instance the event belongs to
    double now = 0.0;
    double battery_threshold = 20.0;   // % level below which devices are told to recharge
    double aqi_window = 60.0;          // neighborhood max-AQI sliding window, virtual s
    double pressure_window = 180.0;    // tendency lookback (3 virtual hours), virtual s

    // First outgoing relationship target of this instance with the given
    // interface; empty when absent.
    std::string forward_target(const std::string& target_interface) const;
    // Instances of `source_interface` whose relationships point at this one.
    std::vector<std::string> related_sources(const std::string& source_interface) const;
};

// Executes the built-in handler registered under `handler_id` for one
// dispatched envelope payload. Emissions are validated before being returned:
// store/virtual emissions carry the context identity, command emissions must
// target an instance reachable through the emitter's own relationships and a
// command the target interface declares. Domain errors (bad payloads, missing
// relationships) come back as failed results, never exceptions.
HandlerResult run_handler(const std::string& handler_id, const std::string& payload,
                          const HandlerContext& ctx);

// True if the id names a built-in handler.
bool known_handler(const std::string& handler_id);

}  // namespace ktwin
