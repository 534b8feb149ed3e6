#include "ktwin/city.hpp"

#include <cstdio>

namespace ktwin {

namespace {

using namespace city;

std::string pad2(int i) {
    char buf[8];
    snprintf(buf, sizeof(buf), "%02d", i);
    return buf;
}

std::string pad3(int i) {
    char buf[8];
    snprintf(buf, sizeof(buf), "%03d", i);
    return buf;
}

ServiceSettings twin_service(const std::string& handler) {
    ServiceSettings s;
    s.handler = handler;
    s.cpu = 0.1;
    s.memory_mib = 64;
    s.autoscale = AutoscalePolicy{"concurrency", 5, 0, 18};
    return s;
}

Property fprop(const std::string& name) { return Property{name, "", Schema::Float, {}}; }
Property iprop(const std::string& name) { return Property{name, "", Schema::Integer, {}}; }

RelationshipDef rel(const std::string& name, const std::string& target) {
    return RelationshipDef{name, "", target, Multiplicity::One};
}

std::vector<TwinInterface> city_interfaces() {
    std::vector<TwinInterface> out;

    {
        TwinInterface i;
        i.name = kNeighborhood;
        i.description = "city neighborhood aggregating pole air-quality reports";
        i.properties = {iprop("aqi"), Property{"warning", "", Schema::Boolean, {}}};
        i.commands = {{"updateairqualityindex", "refresh the neighborhood air quality", "json"}};
        i.service = twin_service("neighborhood");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kPole;
        i.description = "smart pole hosting street sensors";
        i.properties = {fprop("latitude"), fprop("longitude")};
        i.relationships = {rel("within", kNeighborhood)};
        i.commands = {{"updateairqualityindex", "propagate a sensor air-quality report", "json"}};
        i.service = twin_service("pole");
        i.routing = {false, false};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kAirQuality;
        i.description = "air quality observation (CO2, CO, SO2)";
        i.properties = {fprop("co2"), fprop("co"), fprop("so2")};
        i.relationships = {rel("attached-to", kPole)};
        i.service = twin_service("airquality");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kCrowdFlow;
        i.description = "pedestrian flow observation";
        i.properties = {iprop("peopleCount"), fprop("averageSpeed")};
        i.relationships = {rel("attached-to", kPole)};
        i.service = twin_service("crowdflow");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kTrafficFlow;
        i.description = "vehicle flow observation";
        i.properties = {iprop("vehicleCount"), fprop("averageSpeed")};
        i.relationships = {rel("attached-to", kPole)};
        i.service = twin_service("trafficflow");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kWeather;
        i.description = "weather station observation";
        i.properties = {fprop("temperature"), fprop("humidity"),      fprop("pressure"),
                        fprop("precipitation"), fprop("snowHeight"),  fprop("windDirection"),
                        fprop("windSpeed")};
        i.relationships = {rel("attached-to", kPole)};
        i.service = twin_service("weather");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kStreetlight;
        i.description = "street light status";
        i.properties = {Property{"status", "", Schema::Enumeration, {"on", "off"}}};
        i.relationships = {rel("attached-to", kPole)};
        i.service = twin_service("streetlight");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kParkingSpot;
        i.description = "single parking spot status";
        i.properties = {Property{"status", "", Schema::Enumeration, {"free", "occupied", "closed"}}};
        i.relationships = {rel("belongs-to", kOffStreetParking)};
        i.service = twin_service("parkingspot");
        i.routing = {false, false};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kOffStreetParking;
        i.description = "off-street parking aggregating its spots";
        i.properties = {iprop("available")};
        i.relationships = {rel("within", kNeighborhood)};
        i.commands = {{"updatevehiclecount", "recount available spots", "json"}};
        i.service = twin_service("offstreetparking");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kDevice;
        i.description = "battery-powered sensor device";
        i.properties = {fprop("batteryLevel")};
        i.relationships = {rel("monitors-airquality", kAirQuality),
                           rel("monitors-crowdflow", kCrowdFlow),
                           rel("monitors-trafficflow", kTrafficFlow),
                           rel("monitors-noiselevel", kNoiseLevel),
                           rel("monitors-parkingspot", kParkingSpot)};
        i.service = twin_service("device");
        i.routing = {false, true};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kNoiseLevel;
        i.description = "noise level observation, persisted without processing";
        i.properties = {fprop("soundLevel")};
        i.relationships = {rel("attached-to", kPole)};
        i.routing = {true, false};
        out.push_back(i);
    }
    {
        TwinInterface i;
        i.name = kEvCharging;
        i.description = "EV charging station status, persisted without processing";
        i.properties = {Property{"status", "", Schema::Enumeration, {"available", "charging"}},
                        fprop("powerDrawKw")};
        i.relationships = {rel("within", kNeighborhood)};
        i.routing = {true, false};
        out.push_back(i);
    }
    return out;
}

TwinInstance instance(const std::string& name, const std::string& interface) {
    TwinInstance inst;
    inst.name = name;
    inst.interface = interface;
    return inst;
}

void relate(TwinInstance& inst, const std::string& rel_name, const std::string& target) {
    inst.relationships.push_back(RelationshipRef{rel_name, "", {target}});
}

}  // namespace

ResourceSet build_city(int neighborhoods) {
    ResourceSet set;
    set.interfaces = city_interfaces();

    for (int q = 0; q < neighborhoods; ++q) {
        const std::string nb = "nb" + std::to_string(q);
        set.instances.push_back(instance(nb, kNeighborhood));

        for (int i = 0; i < 50; ++i) {
            auto pole = instance(nb + "-pole-" + pad2(i), kPole);
            relate(pole, "within", nb);
            set.instances.push_back(std::move(pole));
        }
        auto sensor_block = [&](const char* tag, const char* iface) {
            for (int i = 0; i < 50; ++i) {
                auto s = instance(nb + "-" + tag + "-" + pad2(i), iface);
                relate(s, "attached-to", nb + "-pole-" + pad2(i));
                set.instances.push_back(std::move(s));
            }
        };
        sensor_block("light", kStreetlight);
        sensor_block("aq", kAirQuality);
        sensor_block("crowd", kCrowdFlow);
        sensor_block("traffic", kTrafficFlow);
        sensor_block("noise", kNoiseLevel);
        sensor_block("weather", kWeather);

        auto ev = instance(nb + "-ev-00", kEvCharging);
        relate(ev, "within", nb);
        set.instances.push_back(std::move(ev));

        auto parking = instance(nb + "-parking-00", kOffStreetParking);
        relate(parking, "within", nb);
        set.instances.push_back(std::move(parking));
        for (int i = 0; i < 20; ++i) {
            auto spot = instance(nb + "-spot-" + pad2(i), kParkingSpot);
            relate(spot, "belongs-to", nb + "-parking-00");
            set.instances.push_back(std::move(spot));
        }

        // 220 monitoring devices: one per air-quality, crowd, traffic and
        // noise sensor, plus one per parking spot.
        int d = 0;
        auto device_block = [&](const char* rel_name, const std::string& target_prefix, int count) {
            for (int i = 0; i < count; ++i, ++d) {
                auto dev = instance(nb + "-dev-" + pad3(d), kDevice);
                relate(dev, rel_name, target_prefix + pad2(i));
                set.instances.push_back(std::move(dev));
            }
        };
        device_block("monitors-airquality", nb + "-aq-", 50);
        device_block("monitors-crowdflow", nb + "-crowd-", 50);
        device_block("monitors-trafficflow", nb + "-traffic-", 50);
        device_block("monitors-noiselevel", nb + "-noise-", 50);
        device_block("monitors-parkingspot", nb + "-spot-", 20);
    }
    return set;
}

std::map<std::string, size_t> city_instance_counts(int neighborhoods) {
    std::map<std::string, size_t> counts;
    const size_t n = static_cast<size_t>(neighborhoods);
    counts[city::kNeighborhood] = 1 * n;
    counts[city::kPole] = 50 * n;
    counts[city::kStreetlight] = 50 * n;
    counts[city::kAirQuality] = 50 * n;
    counts[city::kCrowdFlow] = 50 * n;
    counts[city::kTrafficFlow] = 50 * n;
    counts[city::kNoiseLevel] = 50 * n;
    counts[city::kWeather] = 50 * n;
    counts[city::kEvCharging] = 1 * n;
    counts[city::kOffStreetParking] = 1 * n;
    counts[city::kParkingSpot] = 20 * n;
    counts[city::kDevice] = 220 * n;
    return counts;
}

}  // namespace ktwin
