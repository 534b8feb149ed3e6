#include "ktwin/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ktwin/metrics.hpp"
#include "ktwin/topology.hpp"

namespace ktwin {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Incremental FNV-1a (64-bit), so the run hash can fold several buffers.
uint64_t fnv_step(uint64_t h, std::string_view text) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex16(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json stats_json(const LatencyStats& s) {
    return json{{"count", s.count},   {"p50", s.p50}, {"p90", s.p90}, {"p95", s.p95},
                {"p99", s.p99},       {"mean", s.mean}, {"max", s.max}};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ReportError("cannot write " + path);
    out << content;
    if (!out) throw ReportError("short write to " + path);
}

double window_median(const EventSeries& events, double from, double to) {
    return nearest_rank_percentile(events.per_second_totals(from, to), 50.0);
}

double get_num(const json& j, const json::json_pointer& ptr) {
    if (!j.contains(ptr)) return 0.0;
    const json& v = j.at(ptr);
    return v.is_number() ? v.get<double>() : 0.0;
}

}  // namespace

LatencyStats latency_stats(const std::vector<LatencySample>& samples, double from, double to) {
    std::vector<double> values;
    values.reserve(samples.size());
    double sum = 0.0;
    double mx = 0.0;
    for (const auto& s : samples) {
        if (s.completion < from || s.completion >= to) continue;
        values.push_back(s.latency);
        sum += s.latency;
        mx = std::max(mx, s.latency);
    }
    LatencyStats st;
    st.count = values.size();
    if (values.empty()) return st;
    st.p50 = nearest_rank_percentile(values, 50.0);
    st.p90 = nearest_rank_percentile(values, 90.0);
    st.p95 = nearest_rank_percentile(values, 95.0);
    st.p99 = nearest_rank_percentile(values, 99.0);
    st.mean = sum / static_cast<double>(values.size());
    st.max = mx;
    return st;
}

std::string scaling_csv(const RunResult& result) {
    std::string out = "time,service,ready,cold_starting,buffered,desired\n";
    // Rows grouped by tick time across services, matching how they were taken.
    size_t rows = 0;
    for (const auto& [service, traces] : result.scaling) rows = std::max(rows, traces.size());
    for (size_t i = 0; i < rows; ++i) {
        for (const auto& [service, traces] : result.scaling) {
            if (i >= traces.size()) continue;
            const ScalerTrace& t = traces[i];
            out += format_num(t.time) + "," + service + "," + std::to_string(t.ready) + "," +
                   std::to_string(t.cold_starting) + "," + std::to_string(t.buffered) + "," +
                   std::to_string(t.desired) + "\n";
        }
    }
    return out;
}

std::string latency_csv(const RunResult& result) {
    std::string out = "completion,service,latency\n";
    for (const auto& [service, samples] : result.latency) {
        for (const auto& s : samples) {
            out += format_num(s.completion) + "," + service + "," + format_num(s.latency) + "\n";
        }
    }
    return out;
}

std::string resources_csv(const RunResult& result) {
    std::string out = "time,pods,cpu_requested,memory_mib_requested,utilization\n";
    for (const auto& r : result.resources) {
        out += format_num(r.time) + "," + std::to_string(r.pods) + "," +
               format_num(r.cpu_requested) + "," + format_num(r.memory_mib_requested) + "," +
               format_num(r.utilization) + "\n";
    }
    return out;
}

json summarize(const RunResult& result) {
    const ScenarioConfig& cfg = result.config;
    json summary;

    json scenario;
    scenario["name"] = cfg.name;
    scenario["neighborhoods"] = cfg.neighborhoods;
    scenario["seed"] = cfg.seed;
    scenario["duration"] = cfg.duration;
    scenario["windowSeconds"] = cfg.window_seconds;
    scenario["provisioning"] =
        cfg.provisioning.kind == ProvisioningMode::Kind::Auto ? "auto" : "fixed";
    if (cfg.provisioning.kind == ProvisioningMode::Kind::Fixed) {
        scenario["fixedPerService"] = cfg.provisioning.fixed_per_service;
        scenario["fixedStore"] = cfg.provisioning.fixed_store;
    }
    summary["scenario"] = scenario;

    summary["topology"] = {{"exchanges", result.plan.exchanges.size()},
                           {"queues", result.plan.queues.size()},
                           {"bindings", result.plan.bindings.size()}};

    json events;
    events["total"] = result.events.total();
    json by_type = json::object();
    for (const auto& [type, series] : result.events.by_type()) {
        uint64_t n = 0;
        for (const auto& [sec, count] : series) n += count;
        by_type[type] = n;
    }
    events["byType"] = by_type;
    events["perSecondMedian"] = window_median(result.events, 0.0, cfg.duration);
    json windows = json::array();
    std::vector<double> medians;
    for (int w = 0; w < cfg.window_count(); ++w) {
        double from = w * cfg.window_seconds;
        double to = from + cfg.window_seconds;
        auto buckets = result.events.per_second_totals(from, to);
        double total = 0.0;
        for (double b : buckets) total += b;
        double median = nearest_rank_percentile(buckets, 50.0);
        medians.push_back(median);
        windows.push_back({{"index", w},
                           {"from", from},
                           {"to", to},
                           {"total", total},
                           {"medianRate", median},
                           {"meanRate", cfg.window_seconds > 0 ? total / cfg.window_seconds : 0}});
    }
    events["windows"] = windows;
    events["medianOfWindowMedians"] = nearest_rank_percentile(medians, 50.0);
    summary["events"] = events;

    json latency = json::object();
    for (const auto& [service, samples] : result.latency) {
        json svc;
        svc["overall"] = stats_json(latency_stats(samples, 0.0, result.end_time + 1.0));
        svc["steady"] = stats_json(latency_stats(samples, cfg.window_seconds, cfg.duration));
        json per_window = json::array();
        for (int w = 0; w < cfg.window_count(); ++w) {
            double from = w * cfg.window_seconds;
            per_window.push_back(
                stats_json(latency_stats(samples, from, from + cfg.window_seconds)));
        }
        svc["windows"] = per_window;
        latency[service] = svc;
    }
    summary["latency"] = latency;

    summary["resources"] = {
        {"cpuSeconds", result.cpu_seconds},
        {"memoryMiBSeconds", result.memory_mib_seconds},
        {"podSeconds", result.pod_seconds},
        {"meanPods", cfg.duration > 0 ? result.pod_seconds / cfg.duration : 0.0},
        {"maxPods", result.max_pods},
        {"finalPods", result.final_pods},
    };

    // Publish operations: device publishes, MQTT-dispatcher lifts (one per
    // drain when conversion succeeds), service emissions, and CloudEvent-
    // dispatcher lowers. Queue deliveries all end in a dispatcher drain or a
    // service admission once the run fully drains.
    const BrokerCounters& b = result.broker;
    bool balanced = result.conversion_failures == 0 &&
                    b.published == result.generated + result.emissions + result.republished +
                                       result.mqtt_dispatcher_drains &&
                    b.delivered == result.twin_admissions + result.mqtt_dispatcher_drains +
                                       result.cloudevent_dispatcher_drains +
                                       result.store_dispatcher_drains &&
                    result.handler_runs == result.twin_admissions &&
                    result.store_appends == result.store_admissions &&
                    result.device_receipts == b.device_delivered && result.unfinished == 0;
    summary["conservation"] = {
        {"published", b.published},
        {"delivered", b.delivered},
        {"deviceDelivered", b.device_delivered},
        {"deadLettered", b.dead_lettered},
        {"generated", result.generated},
        {"emissions", result.emissions},
        {"republished", result.republished},
        {"twinAdmissions", result.twin_admissions},
        {"storeAdmissions", result.store_admissions},
        {"handlerRuns", result.handler_runs},
        {"handlerFailures", result.handler_failures},
        {"mqttDispatcherDrains", result.mqtt_dispatcher_drains},
        {"cloudEventDispatcherDrains", result.cloudevent_dispatcher_drains},
        {"storeDispatcherDrains", result.store_dispatcher_drains},
        {"conversionFailures", result.conversion_failures},
        {"storeAppends", result.store_appends},
        {"storeUnknownInstance", result.store_unknown_instance},
        {"deviceReceipts", result.device_receipts},
        {"unfinished", result.unfinished},
        {"endTime", result.end_time},
        {"balanced", balanced},
    };

    uint64_t h = 1469598103934665603ULL;  // FNV offset basis
    h = fnv_step(h, summary.dump());
    h = fnv_step(h, result.events.to_csv());
    h = fnv_step(h, scaling_csv(result));
    h = fnv_step(h, latency_csv(result));
    h = fnv_step(h, resources_csv(result));
    summary["runHash"] = hex16(h);
    return summary;
}

void write_run_dir(const RunResult& result, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "metrics", ec);
    if (ec) throw ReportError("cannot create " + dir + ": " + ec.message());

    write_file((fs::path(dir) / "summary.json").string(), summarize(result).dump(2) + "\n");
    write_file((fs::path(dir) / "topology.json").string(), plan_to_json(result.plan));
    std::string dead;
    for (const auto& line : result.deadletters) dead += line + "\n";
    write_file((fs::path(dir) / "deadletter.log").string(), dead);
    write_file((fs::path(dir) / "metrics" / "events.csv").string(), result.events.to_csv());
    write_file((fs::path(dir) / "metrics" / "scaling.csv").string(), scaling_csv(result));
    write_file((fs::path(dir) / "metrics" / "latency.csv").string(), latency_csv(result));
    write_file((fs::path(dir) / "metrics" / "resources.csv").string(), resources_csv(result));
}

json load_summary(const std::string& run_dir) {
    fs::path path = fs::path(run_dir) / "summary.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ReportError("invalid JSON in " + path.string());
    return j;
}

std::string render_report(const json& s) {
    std::ostringstream out;
    out << "run: " << s.value(json::json_pointer("/scenario/name"), std::string("?"))
        << "  neighborhoods=" << get_num(s, json::json_pointer("/scenario/neighborhoods"))
        << "  seed=" << get_num(s, json::json_pointer("/scenario/seed")) << "  provisioning="
        << s.value(json::json_pointer("/scenario/provisioning"), std::string("?")) << "\n";
    out << "topology: exchanges=" << get_num(s, json::json_pointer("/topology/exchanges"))
        << " queues=" << get_num(s, json::json_pointer("/topology/queues"))
        << " bindings=" << get_num(s, json::json_pointer("/topology/bindings")) << "\n";
    out << "events: total=" << get_num(s, json::json_pointer("/events/total"))
        << " perSecondMedian=" << get_num(s, json::json_pointer("/events/perSecondMedian"))
        << "\n";
    if (s.contains("/events/windows"_json_pointer)) {
        out << "window median rates:";
        for (const auto& w : s["events"]["windows"]) {
            out << " " << format_num(w.value("medianRate", 0.0));
        }
        out << "\n";
    }
    if (s.contains("latency")) {
        out << "steady-state latency (s):\n";
        for (const auto& [service, stats] : s["latency"].items()) {
            out << "  " << service << ": p50=" << format_num(get_num(stats, "/steady/p50"_json_pointer))
                << " p99=" << format_num(get_num(stats, "/steady/p99"_json_pointer))
                << " n=" << get_num(stats, "/steady/count"_json_pointer) << "\n";
        }
    }
    out << "resources: cpuSeconds=" << format_num(get_num(s, "/resources/cpuSeconds"_json_pointer))
        << " memoryMiBSeconds="
        << format_num(get_num(s, "/resources/memoryMiBSeconds"_json_pointer))
        << " maxPods=" << get_num(s, "/resources/maxPods"_json_pointer)
        << " meanPods=" << format_num(get_num(s, "/resources/meanPods"_json_pointer)) << "\n";
    bool balanced = s.value("/conservation/balanced"_json_pointer, false);
    out << "conservation: " << (balanced ? "balanced" : "NOT BALANCED")
        << " unfinished=" << get_num(s, "/conservation/unfinished"_json_pointer)
        << " deadLettered=" << get_num(s, "/conservation/deadLettered"_json_pointer) << "\n";
    out << "runHash: " << s.value("runHash", std::string("?")) << "\n";
    return out.str();
}

std::string render_report_csv(const json& s) {
    std::ostringstream out;
    out << "metric,value\n";
    auto row = [&](const std::string& name, const json::json_pointer& ptr) {
        out << name << "," << format_num(get_num(s, ptr)) << "\n";
    };
    row("events.total", "/events/total"_json_pointer);
    row("events.perSecondMedian", "/events/perSecondMedian"_json_pointer);
    if (s.contains("/events/windows"_json_pointer)) {
        int i = 0;
        for (const auto& w : s["events"]["windows"]) {
            out << "events.window" << i++ << ".medianRate," << format_num(w.value("medianRate", 0.0))
                << "\n";
        }
    }
    if (s.contains("latency")) {
        for (const auto& [service, stats] : s["latency"].items()) {
            out << "latency." << service << ".steady.p50,"
                << format_num(get_num(stats, "/steady/p50"_json_pointer)) << "\n";
            out << "latency." << service << ".steady.p99,"
                << format_num(get_num(stats, "/steady/p99"_json_pointer)) << "\n";
        }
    }
    row("resources.cpuSeconds", "/resources/cpuSeconds"_json_pointer);
    row("resources.memoryMiBSeconds", "/resources/memoryMiBSeconds"_json_pointer);
    row("resources.podSeconds", "/resources/podSeconds"_json_pointer);
    row("resources.maxPods", "/resources/maxPods"_json_pointer);
    row("conservation.unfinished", "/conservation/unfinished"_json_pointer);
    out << "conservation.balanced," << (s.value("/conservation/balanced"_json_pointer, false) ? 1 : 0)
        << "\n";
    out << "runHash," << s.value("runHash", std::string("?")) << "\n";
    return out.str();
}

std::string render_compare(const json& a, const json& b) {
    std::ostringstream out;
    out << "compare: A=" << a.value("/scenario/name"_json_pointer, std::string("?")) << " ("
        << a.value("/scenario/provisioning"_json_pointer, std::string("?"))
        << ")  B=" << b.value("/scenario/name"_json_pointer, std::string("?")) << " ("
        << b.value("/scenario/provisioning"_json_pointer, std::string("?")) << ")\n";
    auto row = [&](const std::string& name, const json::json_pointer& ptr) {
        double va = get_num(a, ptr);
        double vb = get_num(b, ptr);
        out << "  " << name << ": A=" << format_num(va) << " B=" << format_num(vb);
        if (vb != 0.0) {
            out << " delta=" << format_num((va - vb) / vb * 100.0) << "%";
        }
        out << "\n";
    };
    row("events.total", "/events/total"_json_pointer);
    row("events.perSecondMedian", "/events/perSecondMedian"_json_pointer);
    row("resources.cpuSeconds", "/resources/cpuSeconds"_json_pointer);
    row("resources.memoryMiBSeconds", "/resources/memoryMiBSeconds"_json_pointer);
    row("resources.podSeconds", "/resources/podSeconds"_json_pointer);
    row("resources.maxPods", "/resources/maxPods"_json_pointer);
    double cpu_a = get_num(a, "/resources/cpuSeconds"_json_pointer);
    double cpu_b = get_num(b, "/resources/cpuSeconds"_json_pointer);
    if (cpu_b > 0.0) {
        out << "cpu savings of A relative to B: " << format_num((1.0 - cpu_a / cpu_b) * 100.0)
            << "%\n";
    }
    return out.str();
}

}  // namespace ktwin
