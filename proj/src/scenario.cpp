#include "ktwin/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "ktwin/city.hpp"
#include "ktwin/resources.hpp"

namespace ktwin {

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    using namespace city;
    cfg.intervals[kAirQuality] = {10, 10};
    cfg.intervals[kWeather] = {10, 10};
    cfg.intervals[kNoiseLevel] = {10, 10};
    cfg.intervals[kCrowdFlow] = {5, 30};
    cfg.intervals[kTrafficFlow] = {5, 10};
    cfg.intervals[kEvCharging] = {10, 80};
    cfg.intervals[kParkingSpot] = {5, 80};
    cfg.intervals[kStreetlight] = {720, 720};
    cfg.intervals[kDevice] = {460, 460};
    return cfg;
}

namespace {

struct Ctx {
    std::string origin;

    [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
        std::ostringstream os;
        os << origin << ":" << (node.Mark().line + 1) << ": " << msg;
        throw ResourceError(os.str());
    }

    void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                    const std::string& what) const {
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown field '" + key + "' in " + what);
        }
    }

    double num(const YAML::Node& n, const std::string& what) const {
        try {
            return n.as<double>();
        } catch (const YAML::Exception&) {
            fail(n, what + " must be a number");
        }
    }

    int integer(const YAML::Node& n, const std::string& what) const {
        try {
            return n.as<int>();
        } catch (const YAML::Exception&) {
            fail(n, what + " must be an integer");
        }
    }
};

AutoscalePolicy parse_policy(const Ctx& ctx, const YAML::Node& node, AutoscalePolicy base,
                             const std::string& what) {
    if (!node.IsMap()) ctx.fail(node, what + " must be a mapping");
    ctx.check_keys(node, {"target", "min", "max"}, what);
    if (node["target"]) base.target = ctx.integer(node["target"], what + ".target");
    if (node["min"]) base.min_replicas = ctx.integer(node["min"], what + ".min");
    if (node["max"]) base.max_replicas = ctx.integer(node["max"], what + ".max");
    if (base.target <= 0) ctx.fail(node, what + ".target must be positive");
    if (base.min_replicas < 0 || base.max_replicas < std::max(1, base.min_replicas))
        ctx.fail(node, what + " min/max out of order");
    return base;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
    Ctx ctx{origin};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ResourceError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    ScenarioConfig cfg = default_scenario();
    if (!root || root.IsNull()) return cfg;
    if (!root.IsMap()) throw ResourceError(origin + ": scenario must be a mapping");

    ctx.check_keys(root,
                   {"name", "neighborhoods", "duration", "windowSeconds", "seed", "provisioning",
                    "intervals", "jitter", "bootWindow", "handlerMedianMs", "handlerSigma",
                    "storeMedianS", "storeSigma", "dispatcherRate", "scalingTick", "stableWindow",
                    "idleWindow", "coldStart", "twinAutoscale", "storeAutoscale",
                    "containerConcurrency", "cpuPerPod", "memoryMiBPerPod", "batteryThreshold",
                    "aqiWindow", "pressureWindow"},
                   "scenario");

    if (root["name"]) cfg.name = root["name"].as<std::string>();
    if (root["neighborhoods"]) cfg.neighborhoods = ctx.integer(root["neighborhoods"], "neighborhoods");
    if (cfg.neighborhoods < 1) ctx.fail(root["neighborhoods"], "neighborhoods must be >= 1");
    if (root["duration"]) cfg.duration = ctx.num(root["duration"], "duration");
    if (root["windowSeconds"]) cfg.window_seconds = ctx.num(root["windowSeconds"], "windowSeconds");
    if (cfg.duration <= 0 || cfg.window_seconds <= 0)
        throw ResourceError(origin + ": duration and windowSeconds must be positive");
    if (root["seed"]) cfg.seed = root["seed"].as<uint64_t>();

    if (YAML::Node prov = root["provisioning"]) {
        if (prov.IsScalar()) {
            const std::string mode = prov.as<std::string>();
            if (mode == "auto")
                cfg.provisioning.kind = ProvisioningMode::Kind::Auto;
            else
                ctx.fail(prov, "provisioning scalar must be 'auto'");
        } else if (prov.IsMap()) {
            ctx.check_keys(prov, {"mode", "perService", "store"}, "provisioning");
            const std::string mode = prov["mode"] ? prov["mode"].as<std::string>() : "fixed";
            if (mode == "auto") {
                cfg.provisioning.kind = ProvisioningMode::Kind::Auto;
            } else if (mode == "fixed") {
                cfg.provisioning.kind = ProvisioningMode::Kind::Fixed;
                if (!prov["perService"] || !prov["store"])
                    ctx.fail(prov, "fixed provisioning requires perService and store");
                cfg.provisioning.fixed_per_service = ctx.integer(prov["perService"], "perService");
                cfg.provisioning.fixed_store = ctx.integer(prov["store"], "store");
                if (cfg.provisioning.fixed_per_service < 1 || cfg.provisioning.fixed_store < 1)
                    ctx.fail(prov, "fixed provisioning counts must be >= 1");
            } else {
                ctx.fail(prov, "provisioning mode must be 'auto' or 'fixed'");
            }
        } else {
            ctx.fail(prov, "provisioning must be a scalar or mapping");
        }
    }

    if (YAML::Node iv = root["intervals"]) {
        if (!iv.IsMap()) ctx.fail(iv, "intervals must map interface -> interval");
        for (const auto& kv : iv) {
            const std::string iface = kv.first.as<std::string>();
            IntervalSpec spec;
            if (kv.second.IsScalar()) {
                spec.lo = spec.hi = ctx.num(kv.second, "interval for " + iface);
            } else if (kv.second.IsSequence() && kv.second.size() == 2) {
                spec.lo = ctx.num(kv.second[0], "interval lo for " + iface);
                spec.hi = ctx.num(kv.second[1], "interval hi for " + iface);
            } else {
                ctx.fail(kv.second, "interval must be a number or [lo, hi]");
            }
            if (spec.lo <= 0 || spec.hi < spec.lo)
                ctx.fail(kv.second, "interval for " + iface + " must satisfy 0 < lo <= hi");
            cfg.intervals[iface] = spec;
        }
    }

    if (root["jitter"]) cfg.jitter = ctx.num(root["jitter"], "jitter");
    if (root["bootWindow"]) cfg.boot_window = ctx.num(root["bootWindow"], "bootWindow");
    if (root["handlerMedianMs"]) cfg.handler_median_ms = ctx.num(root["handlerMedianMs"], "handlerMedianMs");
    if (root["handlerSigma"]) cfg.handler_sigma = ctx.num(root["handlerSigma"], "handlerSigma");
    if (root["storeMedianS"]) cfg.store_median_s = ctx.num(root["storeMedianS"], "storeMedianS");
    if (root["storeSigma"]) cfg.store_sigma = ctx.num(root["storeSigma"], "storeSigma");
    if (root["dispatcherRate"]) cfg.dispatcher_rate = ctx.num(root["dispatcherRate"], "dispatcherRate");
    if (cfg.dispatcher_rate <= 0) throw ResourceError(origin + ": dispatcherRate must be positive");
    if (root["scalingTick"]) cfg.scaling_tick = ctx.num(root["scalingTick"], "scalingTick");
    if (root["stableWindow"]) cfg.stable_window = ctx.num(root["stableWindow"], "stableWindow");
    if (root["idleWindow"]) cfg.idle_window = ctx.num(root["idleWindow"], "idleWindow");
    if (YAML::Node cold = root["coldStart"]) {
        if (!cold.IsSequence() || cold.size() != 2) ctx.fail(cold, "coldStart must be [lo, hi]");
        cfg.cold_start_lo = ctx.num(cold[0], "coldStart lo");
        cfg.cold_start_hi = ctx.num(cold[1], "coldStart hi");
        if (cfg.cold_start_lo < 0 || cfg.cold_start_hi < cfg.cold_start_lo)
            ctx.fail(cold, "coldStart must satisfy 0 <= lo <= hi");
    }
    if (root["twinAutoscale"]) {
        cfg.twin_policy = parse_policy(ctx, root["twinAutoscale"], cfg.twin_policy, "twinAutoscale");
        cfg.twin_policy_set = true;
    }
    if (root["storeAutoscale"])
        cfg.store_policy =
            parse_policy(ctx, root["storeAutoscale"], cfg.store_policy, "storeAutoscale");
    if (root["containerConcurrency"])
        cfg.container_concurrency = ctx.integer(root["containerConcurrency"], "containerConcurrency");
    if (root["cpuPerPod"]) cfg.cpu_per_pod = ctx.num(root["cpuPerPod"], "cpuPerPod");
    if (root["memoryMiBPerPod"])
        cfg.memory_mib_per_pod = static_cast<uint64_t>(ctx.integer(root["memoryMiBPerPod"], "memoryMiBPerPod"));
    if (root["batteryThreshold"]) cfg.battery_threshold = ctx.num(root["batteryThreshold"], "batteryThreshold");
    if (root["aqiWindow"]) cfg.aqi_window = ctx.num(root["aqiWindow"], "aqiWindow");
    if (root["pressureWindow"]) cfg.pressure_window = ctx.num(root["pressureWindow"], "pressureWindow");
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

}  // namespace ktwin
