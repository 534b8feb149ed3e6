#pragma once

#include "ktwin/resources.hpp"

namespace ktwin {

// Canonical interface names of the Smart City model.
namespace city {
inline constexpr const char* kNeighborhood = "s4city-city-neighborhood";
inline constexpr const char* kPole = "city-pole";
inline constexpr const char* kAirQuality = "ngsi-ld-city-airqualityobserved";
inline constexpr const char* kCrowdFlow = "ngsi-ld-city-crowdflowobserved";
inline constexpr const char* kTrafficFlow = "ngsi-ld-city-trafficflowobserved";
inline constexpr const char* kWeather = "ngsi-ld-city-weatherobserved";
inline constexpr const char* kStreetlight = "ngsi-ld-city-streetlight";
inline constexpr const char* kParkingSpot = "ngsi-ld-city-parkingspot";
inline constexpr const char* kOffStreetParking = "ngsi-ld-city-offstreetparking";
inline constexpr const char* kDevice = "ngsi-ld-city-device";
inline constexpr const char* kNoiseLevel = "ngsi-ld-city-noiselevelobserved";
inline constexpr const char* kEvCharging = "ngsi-ld-city-evchargingstation";
}  // namespace city

// Builds the Smart City resource model for the given number of neighborhoods.
// Each neighborhood carries 1 neighborhood twin, 50 poles, 50 streetlights,
// 50 air-quality / crowd-flow / traffic-flow / noise-level / weather sensors,
// 1 EV charging station, 1 off-street parking with 20 spots, and 220
// battery-reporting devices (one per air-quality, crowd, traffic, noise and
// spot entity) — 593 instances per neighborhood.
ResourceSet build_city(int neighborhoods);

// Instance counts per interface for sizing checks.
std::map<std::string, size_t> city_instance_counts(int neighborhoods);

}  // namespace ktwin
