#include "ktwin/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>
#include <random>

#include "ktwin/city.hpp"
#include "ktwin/handlers.hpp"
#include "ktwin/rng.hpp"
#include "ktwin/routing.hpp"
#include "vendor/json.hpp"

namespace ktwin {
namespace {

// Event ordering at equal timestamps: dispatcher drains run before replica
// readiness, readiness before handler completions, completions before new
// device publishes, and the scaler tick always observes everything else that
// happened at its instant.
enum class SimKind : int {
    DispatcherDrain = 0,
    ReplicaReady = 1,
    HandlerComplete = 2,
    DevicePublish = 3,
    ScalerTick = 4,
};

struct SimEvent {
    double at = 0.0;
    SimKind kind = SimKind::ScalerTick;
    uint64_t seq = 0;

    // DispatcherDrain
    int dispatcher = -1;
    // ReplicaReady / HandlerComplete
    std::string service;
    uint64_t replica = 0;
    // HandlerComplete
    Envelope work;
    // DevicePublish
    std::string instance;
};

struct EventOrder {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.at != b.at) return a.at > b.at;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        return a.seq > b.seq;
    }
};

struct Dispatcher {
    std::string queue;
    double next_free = 0.0;
    bool scheduled = false;
    uint64_t drains = 0;
};

// Mutable per-publisher state. Payload draws use a fresh generator per
// publish (seeded from the instance name and publish ordinal) so memory
// stays flat at city scale.
struct PublisherState {
    std::string interface;
    uint64_t count = 0;
    double base_temp = 0.0;
    double pressure = 0.0;
};

class Engine {
public:
    Engine(const ScenarioConfig& cfg, const std::string& store_dir)
        : cfg_(cfg),
          store_(store_dir.empty() ? EventStore() : EventStore(store_dir)) {
        auto resources = build_city(cfg_.neighborhoods);
        graph_ = resolve_graph(resources.interfaces, resources.instances);
        subgraphs_ = std::make_unique<SubgraphCache>(graph_);
        reverse_ = build_reverse_adjacency(graph_);
        plan_ = derive_topology(graph_);
        broker_ = std::make_unique<Broker>(plan_);
        setup_services();
        setup_publishers();
    }

    RunResult run() {
        schedule(cfg_.scaling_tick, SimKind::ScalerTick);
        while (!heap_.empty()) {
            SimEvent ev = heap_.top();
            heap_.pop();
            now_ = ev.at;
            switch (ev.kind) {
                case SimKind::DispatcherDrain: on_drain(ev.dispatcher); break;
                case SimKind::ReplicaReady: on_ready(ev.service, ev.replica); break;
                case SimKind::HandlerComplete: on_complete(ev); break;
                case SimKind::DevicePublish: on_publish(ev.instance); break;
                case SimKind::ScalerTick: on_tick(); break;
            }
        }
        return finish();
    }

private:
    // ---- setup -----------------------------------------------------------

    void setup_services() {
        for (const auto& [name, iface] : graph_.interfaces) {
            if (!iface.serviced()) continue;
            ScalerConfig sc;
            sc.service = name;
            sc.policy = cfg_.twin_policy_set ? cfg_.twin_policy : iface.service->autoscale;
            if (cfg_.provisioning.kind == ProvisioningMode::Kind::Fixed) {
                sc.policy.min_replicas = cfg_.provisioning.fixed_per_service;
                sc.policy.max_replicas = cfg_.provisioning.fixed_per_service;
            }
            sc.cpu_per_pod = cfg_.cpu_per_pod;
            sc.memory_mib_per_pod = cfg_.memory_mib_per_pod;
            sc.container_concurrency = cfg_.container_concurrency;
            sc.stable_window = cfg_.stable_window;
            sc.idle_window = cfg_.idle_window;
            sc.cold_start_lo = cfg_.cold_start_lo;
            sc.cold_start_hi = cfg_.cold_start_hi;
            add_service(sc, iface.service->handler);
        }
        ScalerConfig sc;
        sc.service = kEventStoreService;
        sc.policy = cfg_.store_policy;
        if (cfg_.provisioning.kind == ProvisioningMode::Kind::Fixed) {
            sc.policy.min_replicas = cfg_.provisioning.fixed_store;
            sc.policy.max_replicas = cfg_.provisioning.fixed_store;
        }
        sc.cpu_per_pod = cfg_.cpu_per_pod;
        sc.memory_mib_per_pod = cfg_.memory_mib_per_pod;
        sc.container_concurrency = cfg_.container_concurrency;
        sc.stable_window = cfg_.stable_window;
        sc.idle_window = cfg_.idle_window;
        sc.cold_start_lo = cfg_.cold_start_lo;
        sc.cold_start_hi = cfg_.cold_start_hi;
        add_service(sc, "");

        dispatchers_[0] = {std::string(kMqttDispatcher), 0.0, false, 0};
        dispatchers_[1] = {std::string(kCloudEventDispatcher), 0.0, false, 0};
        dispatchers_[2] = {std::string(kEventStoreDispatcher), 0.0, false, 0};
    }

    void add_service(const ScalerConfig& sc, const std::string& handler) {
        uint64_t seed = splitmix64(cfg_.seed ^ fnv1a64("scaler:" + sc.service));
        scalers_.emplace(sc.service, std::make_unique<ServiceScaler>(sc, seed));
        handlers_[sc.service] = handler;
        auto timing = make_stream(cfg_.seed, "svc:" + sc.service);
        double median = sc.service == kEventStoreService
                            ? cfg_.store_median_s
                            : cfg_.handler_median_ms / 1000.0;
        double sigma = sc.service == kEventStoreService ? cfg_.store_sigma : cfg_.handler_sigma;
        timing_.emplace(sc.service, ServiceTiming{std::move(timing), std::log(median), sigma});
    }

    void setup_publishers() {
        for (const auto& [name, inst] : graph_.instances) {
            auto it = cfg_.intervals.find(inst.interface);
            if (it == cfg_.intervals.end()) continue;
            PublisherState st;
            st.interface = inst.interface;
            auto init = make_stream(cfg_.seed, "dev:" + name);
            std::uniform_real_distribution<double> boot(0.0, cfg_.boot_window);
            double first = boot(init);
            if (inst.interface == city::kWeather) {
                std::uniform_real_distribution<double> t(8.0, 30.0);
                std::uniform_real_distribution<double> p(995.0, 1025.0);
                st.base_temp = t(init);
                st.pressure = p(init);
            }
            publishers_.emplace(name, std::move(st));
            broker_->subscribe_device(
                encode_routing_key({EventCategory::Virtual, inst.interface, name, ""}));
            schedule_publish(first, name);
        }
    }

    // ---- scheduling helpers ------------------------------------------------

    void schedule(double at, SimKind kind) {
        SimEvent ev;
        ev.at = at;
        ev.kind = kind;
        ev.seq = seq_++;
        heap_.push(std::move(ev));
    }

    void schedule_publish(double at, const std::string& instance) {
        SimEvent ev;
        ev.at = at;
        ev.kind = SimKind::DevicePublish;
        ev.seq = seq_++;
        ev.instance = instance;
        heap_.push(std::move(ev));
    }

    void schedule_ready(double at, const std::string& service, uint64_t replica) {
        SimEvent ev;
        ev.at = at;
        ev.kind = SimKind::ReplicaReady;
        ev.seq = seq_++;
        ev.service = service;
        ev.replica = replica;
        heap_.push(std::move(ev));
    }

    void schedule_complete(double at, const std::string& service, uint64_t replica,
                           Envelope work) {
        SimEvent ev;
        ev.at = at;
        ev.kind = SimKind::HandlerComplete;
        ev.seq = seq_++;
        ev.service = service;
        ev.replica = replica;
        ev.work = std::move(work);
        heap_.push(std::move(ev));
    }

    void ensure_drain(int idx) {
        Dispatcher& d = dispatchers_[idx];
        if (d.scheduled || broker_->queue(d.queue).empty()) return;
        SimEvent ev;
        ev.at = std::max(now_, d.next_free);
        ev.kind = SimKind::DispatcherDrain;
        ev.seq = seq_++;
        ev.dispatcher = idx;
        heap_.push(std::move(ev));
        d.scheduled = true;
    }

    int dispatcher_index(const std::string& queue) const {
        if (queue == kMqttDispatcher) return 0;
        if (queue == kCloudEventDispatcher) return 1;
        if (queue == kEventStoreDispatcher) return 2;
        return -1;
    }

    // Route freshly delivered envelopes: dispatcher queues drain on their own
    // clock, service queues hand work to the autoscaler immediately.
    void deliver(const PublishOutcome& outcome) {
        result_.device_receipts += outcome.device_deliveries;
        for (const auto& q : outcome.queues) {
            int idx = dispatcher_index(q);
            if (idx >= 0) {
                ensure_drain(idx);
                continue;
            }
            // Twin service queues are drained synchronously: the consumer is
            // the autoscaler's own buffer, which is what the scaling policy
            // actually measures.
            auto& dq = broker_->queue(q);
            while (!dq.empty()) {
                Envelope env = std::move(dq.front());
                dq.pop_front();
                ++result_.twin_admissions;
                place(q, scalers_.at(q)->admit(std::move(env), now_));
            }
        }
    }

    void place(const std::string& service, std::vector<Placement> placements) {
        auto& timing = timing_.at(service);
        for (auto& p : placements) {
            std::lognormal_distribution<double> dist(timing.log_median, timing.sigma);
            double d = dist(timing.rng);
            schedule_complete(now_ + d, service, p.replica_id, std::move(p.work));
        }
    }

    // ---- event handlers ----------------------------------------------------

    void on_drain(int idx) {
        Dispatcher& d = dispatchers_[idx];
        d.scheduled = false;
        auto& q = broker_->queue(d.queue);
        if (q.empty()) return;
        Envelope env = std::move(q.front());
        q.pop_front();
        ++d.drains;
        d.next_free = now_ + 1.0 / cfg_.dispatcher_rate;
        switch (idx) {
            case 0: drain_mqtt(std::move(env)); break;
            case 1: drain_cloudevent(std::move(env)); break;
            case 2: drain_store(std::move(env)); break;
        }
        ensure_drain(idx);
    }

    void drain_mqtt(Envelope env) {
        Envelope ce;
        try {
            ce = to_cloudevent(env);
        } catch (const RoutingError& e) {
            ++result_.conversion_failures;
            return;
        }
        ce.published_at = now_;
        deliver(broker_->publish_headers(ce));
    }

    void drain_cloudevent(Envelope env) {
        Envelope mq;
        try {
            mq = to_mqtt(env);
        } catch (const RoutingError& e) {
            ++result_.conversion_failures;
            return;
        }
        mq.published_at = now_;
        ++result_.republished;
        deliver(broker_->publish_topic(mq));
    }

    void drain_store(Envelope env) {
        ++result_.store_admissions;
        place(kEventStoreService, scalers_.at(kEventStoreService)->admit(std::move(env), now_));
    }

    void on_ready(const std::string& service, uint64_t replica) {
        place(service, scalers_.at(service)->on_replica_ready(replica, now_));
    }

    void on_complete(const SimEvent& ev) {
        if (ev.service == kEventStoreService) {
            complete_store(ev.work);
        } else {
            complete_twin(ev.service, ev.work);
        }
        latency_of(ev.service).push_back({now_, now_ - ev.work.first_publish});
        place(ev.service, scalers_.at(ev.service)->on_complete(ev.replica, now_));
    }

    void complete_store(const Envelope& env) {
        RoutingKey key;
        try {
            key = decode_type(env.type);
        } catch (const RoutingError&) {
            ++result_.conversion_failures;
            return;
        }
        bool known = graph_.find_instance(env.source) != nullptr;
        store_.append(key.interface, env.source, now_, env.payload, known);
        ++result_.store_appends;
        if (!known) ++result_.store_unknown_instance;
    }

    void complete_twin(const std::string& service, const Envelope& env) {
        ++result_.handler_runs;
        HandlerContext ctx;
        ctx.graph = &graph_;
        ctx.subgraphs = subgraphs_.get();
        ctx.reverse = &reverse_;
        ctx.store = &store_;
        ctx.interface = service;
        ctx.instance = env.source;
        ctx.now = now_;
        ctx.battery_threshold = cfg_.battery_threshold;
        ctx.aqi_window = cfg_.aqi_window;
        ctx.pressure_window = cfg_.pressure_window;
        HandlerResult r = run_handler(handlers_.at(service), env.payload, ctx);
        if (r.failed) {
            ++result_.handler_failures;
            return;
        }
        for (auto& em : r.emissions) {
            publish_emission(em);
        }
    }

    void publish_emission(const Emission& em) {
        Envelope env;
        env.id = next_id_++;
        env.op_seq = next_op_++;
        env.kind = EnvelopeKind::CloudEvent;
        env.type = em.category == EventCategory::Command
                       ? event_type_of(em.category, em.interface, em.command)
                       : event_type_of(em.category, em.interface);
        env.source = em.instance;
        env.payload = em.payload;
        env.first_publish = now_;
        env.published_at = now_;
        ++result_.emissions;
        result_.events.record(env.type, now_);
        deliver(broker_->publish_headers(env));
    }

    void on_publish(const std::string& instance) {
        PublisherState& st = publishers_.at(instance);
        ++st.count;
        auto rng = publish_stream(instance, st.count);

        Envelope env;
        env.id = next_id_++;
        env.op_seq = next_op_++;
        env.kind = EnvelopeKind::Mqtt;
        env.topic = encode_routing_key({EventCategory::Real, st.interface, instance, ""});
        env.payload = device_payload(st, rng).dump();
        env.first_publish = now_;
        env.published_at = now_;
        ++result_.generated;
        result_.events.record(event_type_of(EventCategory::Real, st.interface), now_);
        deliver(broker_->publish_topic(env));

        double gap = next_interval(st.interface, rng);
        double next = now_ + gap;
        if (next <= cfg_.duration) schedule_publish(next, instance);
    }

    std::mt19937_64 publish_stream(const std::string& instance, uint64_t ordinal) {
        uint64_t base = splitmix64(cfg_.seed ^ fnv1a64("dev:" + instance));
        return std::mt19937_64(splitmix64(base + ordinal));
    }

    // Interval draw for the window containing `now_`. Fixed intervals jitter
    // around their base; ranged intervals alternate through thirds of their
    // range so load swings from window to window.
    double next_interval(const std::string& iface, std::mt19937_64& rng) {
        const IntervalSpec& spec = cfg_.intervals.at(iface);
        int w = static_cast<int>(now_ / cfg_.window_seconds);
        w = std::clamp(w, 0, cfg_.window_count() - 1);
        if (spec.fixed()) {
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            return spec.lo * (1.0 + cfg_.jitter * u(rng));
        }
        double span = (spec.hi - spec.lo) / 3.0;
        double lo = spec.lo;
        double hi = spec.hi;
        switch (w % 6) {
            case 0:
            case 5: lo = spec.hi - span; break;  // long gaps: quiet edge windows
            case 2:
            case 4: hi = spec.lo + span; break;  // short gaps: peak mid windows
            default: lo = spec.lo + span; hi = spec.hi - span; break;
        }
        std::uniform_real_distribution<double> u(lo, hi);
        return u(rng);
    }

    nlohmann::json device_payload(PublisherState& st, std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const std::string& iface = st.interface;
        nlohmann::json j;
        if (iface == city::kAirQuality) {
            if (unit(rng) < 0.9) {
                j["co2"] = draw(rng, 380.0, 550.0);
                j["co"] = draw(rng, 0.2, 3.5);
                j["so2"] = draw(rng, 0.0, 25.0);
            } else {
                j["co2"] = draw(rng, 1200.0, 4500.0);
                j["co"] = draw(rng, 9.0, 28.0);
                j["so2"] = draw(rng, 150.0, 500.0);
            }
        } else if (iface == city::kCrowdFlow) {
            j["peopleCount"] = static_cast<int64_t>(draw(rng, 0.0, 120.0));
            j["averageSpeed"] = draw(rng, 0.5, 2.0);
        } else if (iface == city::kTrafficFlow) {
            j["vehicleCount"] = static_cast<int64_t>(draw(rng, 0.0, 60.0));
            j["averageSpeed"] = draw(rng, 15.0, 90.0);
        } else if (iface == city::kWeather) {
            st.pressure += draw(rng, -0.4, 0.4);
            j["temperature"] = st.base_temp + draw(rng, -3.0, 3.0);
            j["relativeHumidity"] = draw(rng, 25.0, 95.0);
            j["atmosphericPressure"] = st.pressure;
            j["windSpeed"] = draw(rng, 0.0, 40.0);
            j["windDirection"] = draw(rng, 0.0, 360.0);
            j["precipitation"] = draw(rng, 0.0, 2.0);
        } else if (iface == city::kStreetlight) {
            j["powerState"] = unit(rng) < 0.5 ? "on" : "off";
            j["luminosity"] = draw(rng, 0.0, 100.0);
        } else if (iface == city::kParkingSpot) {
            double u = unit(rng);
            j["status"] = u < 0.45 ? "free" : (u < 0.95 ? "occupied" : "closed");
        } else if (iface == city::kDevice) {
            j["batteryLevel"] = draw(rng, 0.0, 100.0);
        } else if (iface == city::kNoiseLevel) {
            j["soundLevel"] = draw(rng, 35.0, 95.0);
        } else if (iface == city::kEvCharging) {
            bool busy = unit(rng) < 0.5;
            j["status"] = busy ? "charging" : "available";
            j["powerDrawKw"] = busy ? draw(rng, 7.0, 120.0) : 0.0;
        } else {
            j["value"] = unit(rng);
        }
        return j;
    }

    static double draw(std::mt19937_64& rng, double lo, double hi) {
        std::uniform_real_distribution<double> u(lo, hi);
        return u(rng);
    }

    void on_tick() {
        integrate_resources();
        int pods = 0;
        double in_flight = 0.0;
        double capacity = 0.0;
        for (auto& [name, scaler] : scalers_) {
            ServiceScaler::TickResult tr = scaler->tick(now_);
            for (const auto& [id, ready_at] : tr.created) {
                schedule_ready(ready_at, name, id);
            }
            result_.scaling[name].push_back(tr.trace);
            pods += scaler->total_pods();
            in_flight += static_cast<double>(scaler->in_flight_total());
            capacity += static_cast<double>(scaler->total_pods() * scaler->config().policy.target);
        }
        double util = 0.0;
        if (pods > 0) {
            util = std::max(0.05, std::min(1.0, capacity > 0 ? in_flight / capacity : 0.0));
        }
        result_.resources.push_back({now_, pods, total_cpu(), total_memory(), util});
        result_.max_pods = std::max(result_.max_pods, pods);

        if (!past_end_and_quiet()) schedule(now_ + cfg_.scaling_tick, SimKind::ScalerTick);
    }

    bool past_end_and_quiet() const {
        if (now_ <= cfg_.duration) return false;
        if (!broker_->all_queues_empty()) return false;
        for (const auto& [name, scaler] : scalers_) {
            if (!scaler->idle()) return false;
            if (scaler->total_pods() != scaler->config().policy.min_replicas) return false;
        }
        return true;
    }

    double total_cpu() const {
        double c = 0.0;
        for (const auto& [n, s] : scalers_) c += s->cpu_requested();
        return c;
    }

    double total_memory() const {
        double m = 0.0;
        for (const auto& [n, s] : scalers_) m += s->memory_mib_requested();
        return m;
    }

    uint64_t total_pods() const {
        uint64_t p = 0;
        for (const auto& [n, s] : scalers_) p += static_cast<uint64_t>(s->total_pods());
        return p;
    }

    // Piecewise-constant integration of requested resources, clipped to the
    // measured horizon [0, duration].
    void integrate_resources() {
        double to = std::min(now_, cfg_.duration);
        if (to > integrated_to_) {
            double dt = to - integrated_to_;
            result_.cpu_seconds += total_cpu() * dt;
            result_.memory_mib_seconds += total_memory() * dt;
            result_.pod_seconds += static_cast<double>(total_pods()) * dt;
            integrated_to_ = to;
        }
    }

    std::vector<LatencySample>& latency_of(const std::string& service) {
        return result_.latency[service];
    }

    static RoutingKey decode_type(const std::string& type) {
        // CloudEvent types share the routing-key grammar minus the instance
        // segment; the instance travels in `source`.
        RoutingKey key;
        std::vector<std::string> segs;
        size_t start = 0;
        while (start <= type.size()) {
            size_t dot = type.find('.', start);
            if (dot == std::string::npos) {
                segs.push_back(type.substr(start));
                break;
            }
            segs.push_back(type.substr(start, dot - start));
            start = dot + 1;
        }
        if (segs.size() < 3 || segs[0] != "ktwin") {
            throw RoutingError("malformed event type: " + type);
        }
        auto cat = parse_category(segs[1]);
        if (!cat) throw RoutingError("unknown event category in type: " + type);
        key.category = *cat;
        key.interface = segs[2];
        if (segs.size() > 3) key.command = segs[3];
        return key;
    }

    RunResult finish() {
        // Settle the resource integral to the end of the horizon even if the
        // last tick fired before `duration`.
        now_ = std::max(now_, cfg_.duration);
        integrate_resources();
        result_.end_time = now_;
        result_.config = cfg_;
        result_.plan = plan_;
        result_.broker = broker_->counters();
        result_.mqtt_dispatcher_drains = dispatchers_[0].drains;
        result_.cloudevent_dispatcher_drains = dispatchers_[1].drains;
        result_.store_dispatcher_drains = dispatchers_[2].drains;
        result_.final_pods = static_cast<int>(total_pods());
        for (const auto& line : broker_->deadletters()) result_.deadletters.push_back(line);
        uint64_t leftovers = broker_->queued_total();
        for (const auto& [name, scaler] : scalers_) {
            leftovers += scaler->in_flight_total() + scaler->buffered();
        }
        result_.unfinished = leftovers;
        store_.flush();
        return std::move(result_);
    }

    struct ServiceTiming {
        std::mt19937_64 rng;
        double log_median;
        double sigma;
    };

    ScenarioConfig cfg_;
    EventStore store_;
    TwinGraph graph_;
    std::unique_ptr<SubgraphCache> subgraphs_;
    ReverseAdjacency reverse_;
    TopologyPlan plan_;
    std::unique_ptr<Broker> broker_;
    std::map<std::string, std::unique_ptr<ServiceScaler>> scalers_;
    std::map<std::string, std::string> handlers_;
    std::map<std::string, ServiceTiming> timing_;
    std::map<std::string, PublisherState> publishers_;
    Dispatcher dispatchers_[3];

    std::priority_queue<SimEvent, std::vector<SimEvent>, EventOrder> heap_;
    double now_ = 0.0;
    double integrated_to_ = 0.0;
    uint64_t seq_ = 0;
    uint64_t next_id_ = 1;
    uint64_t next_op_ = 1;
    RunResult result_;
};

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const std::string& store_dir) {
    Engine engine(cfg, store_dir);
    return engine.run();
}

}  // namespace ktwin
