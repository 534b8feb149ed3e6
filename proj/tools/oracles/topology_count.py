#!/usr/bin/env python3
"""Enumerate the broker topology for the default Smart City model and freeze
the expected resource counts (exchanges / queues / bindings).

The derivation rule, applied per interface:
  - serviced and direct-to-store interfaces each get one topic binding
    ktwin.real.<iface>.* -> mqtt-dispatcher
  - serviced: header binding ktwin.real.<iface> -> own queue
  - serviced: header binding ktwin.virtual.<iface> -> cloudevent-dispatcher
  - persisting (persist-store-events): header ktwin.store.<iface> -> event-store-dispatcher
  - each declared command: header ktwin.command.<iface>.<cmd> -> declaring queue
  - direct-to-store (persist-real-directly): header ktwin.real.<iface> -> event-store-dispatcher

Writes tests/data/topology_expected.inc.
"""

SERVICED = [
    ("city-pole", False, ["updateairqualityindex"]),
    ("s4city-city-neighborhood", True, ["updateairqualityindex"]),
    ("ngsi-ld-city-offstreetparking", True, ["updatevehiclecount"]),
    ("ngsi-ld-city-airqualityobserved", True, []),
    ("ngsi-ld-city-crowdflowobserved", True, []),
    ("ngsi-ld-city-trafficflowobserved", True, []),
    ("ngsi-ld-city-weatherobserved", True, []),
    ("ngsi-ld-city-streetlight", True, []),
    ("ngsi-ld-city-parkingspot", False, []),
    ("ngsi-ld-city-device", True, []),
]
DIRECT_TO_STORE = [
    "ngsi-ld-city-noiselevelobserved",
    "ngsi-ld-city-evchargingstation",
]


def main():
    bindings = []
    for name, persists, commands in SERVICED:
        bindings.append(("mqtt", "ktwin.real.%s.*" % name, "mqtt-dispatcher"))
        bindings.append(("broker", "ktwin.real.%s" % name, name))
        bindings.append(("broker", "ktwin.virtual.%s" % name, "cloudevent-dispatcher"))
        if persists:
            bindings.append(("broker", "ktwin.store.%s" % name, "event-store-dispatcher"))
        for cmd in commands:
            bindings.append(("broker", "ktwin.command.%s.%s" % (name, cmd), name))
    for name in DIRECT_TO_STORE:
        bindings.append(("mqtt", "ktwin.real.%s.*" % name, "mqtt-dispatcher"))
        bindings.append(("broker", "ktwin.real.%s" % name, "event-store-dispatcher"))

    queues = 3 + len(SERVICED)
    with open("tests/data/topology_expected.inc", "w") as f:
        f.write("// generated by tools/oracles/topology_count.py -- do not edit\n")
        f.write("static const int kExpectedExchanges = 2;\n")
        f.write("static const int kExpectedQueues = %d;\n" % queues)
        f.write("static const int kExpectedBindings = %d;\n" % len(bindings))
    print("exchanges=2 queues=%d bindings=%d" % (queues, len(bindings)))

if __name__ == "__main__":
    main()
