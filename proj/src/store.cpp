#include "ktwin/store.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"

namespace ktwin {

namespace {

using nlohmann::json;

std::string encode_record(const StoredEvent& ev) {
    json j;
    j["interface"] = ev.interface;
    j["instance"] = ev.instance;
    j["time"] = ev.time;
    j["sequence"] = ev.sequence;
    j["payload"] = ev.payload;
    if (ev.unknown_instance) j["unknownInstance"] = true;
    return j.dump();
}

StoredEvent decode_record(const std::string& body) {
    json j = json::parse(body);
    StoredEvent ev;
    ev.interface = j.at("interface").get<std::string>();
    ev.instance = j.at("instance").get<std::string>();
    ev.time = j.at("time").get<double>();
    ev.sequence = j.at("sequence").get<uint64_t>();
    ev.payload = j.at("payload").get<std::string>();
    ev.unknown_instance = j.value("unknownInstance", false);
    return ev;
}

void put_le32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_le32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint32_t crc_of(const std::string& body) {
    return static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
}

// Continuation tokens name the last event already returned.
struct Token {
    double time;
    std::string instance;
    uint64_t sequence;
};

std::string encode_token(const StoredEvent& ev) {
    char buf[64];
    snprintf(buf, sizeof(buf), "tok:%.17g:%llu:", ev.time,
             static_cast<unsigned long long>(ev.sequence));
    return buf + ev.instance;
}

Token decode_token(const std::string& token) {
    if (token.rfind("tok:", 0) != 0) throw StoreError("malformed continuation token");
    const size_t a = token.find(':', 4);
    const size_t b = (a == std::string::npos) ? std::string::npos : token.find(':', a + 1);
    if (b == std::string::npos) throw StoreError("malformed continuation token");
    Token t;
    try {
        t.time = std::stod(token.substr(4, a - 4));
        t.sequence = std::stoull(token.substr(a + 1, b - a - 1));
    } catch (const std::exception&) {
        throw StoreError("malformed continuation token");
    }
    t.instance = token.substr(b + 1);
    return t;
}

bool after_token(const StoredEvent& ev, const Token& t) {
    if (ev.time != t.time) return ev.time > t.time;
    if (ev.instance != t.instance) return ev.instance > t.instance;
    return ev.sequence > t.sequence;
}

}  // namespace

EventStore::EventStore(const std::string& dir, size_t segment_limit_bytes)
    : dir_(dir), segment_limit_(segment_limit_bytes) {
    std::filesystem::create_directories(dir_);
    open_segment();
}

EventStore::~EventStore() {
    try {
        if (!dir_.empty() && active_.is_open()) flush();
    } catch (...) {
        // best effort on teardown
    }
}

void EventStore::open_segment() {
    char name[32];
    snprintf(name, sizeof(name), "segment-%06d.log", segment_index_++);
    const std::string path = dir_ + "/" + name;
    active_.open(path, std::ios::binary | std::ios::trunc);
    if (!active_) throw StoreError("cannot open segment file '" + path + "'");
    segment_bytes_ = 0;
    active_records_ = 0;
    finished_segments_.emplace_back(name, 0);
}

void EventStore::write_record(const StoredEvent& ev) {
    const std::string body = encode_record(ev);
    std::string frame;
    frame.reserve(body.size() + 8);
    put_le32(frame, static_cast<uint32_t>(body.size()));
    put_le32(frame, crc_of(body));
    frame += body;
    if (segment_bytes_ > 0 && segment_bytes_ + frame.size() > segment_limit_) {
        finished_segments_.back().second = active_records_;
        active_.close();
        open_segment();
    }
    active_.write(frame.data(), static_cast<std::streamsize>(frame.size()));
    segment_bytes_ += frame.size();
    active_records_++;
}

uint64_t EventStore::append(const std::string& interface, const std::string& instance, double time,
                            std::string payload, bool known_instance) {
    auto& events = data_[interface][instance];
    StoredEvent ev;
    ev.interface = interface;
    ev.instance = instance;
    ev.time = time;
    ev.sequence = events.empty() ? 1 : events.back().sequence + 1;
    ev.payload = std::move(payload);
    ev.unknown_instance = !known_instance;
    if (!events.empty() && time < events.back().time)
        throw StoreError("append at t=" + std::to_string(time) + " precedes key head for " +
                         interface + "/" + instance);
    if (!known_instance) unknown_++;
    total_++;
    if (!dir_.empty()) write_record(ev);
    events.push_back(std::move(ev));
    return events.back().sequence;
}

std::optional<StoredEvent> EventStore::latest(const std::string& interface,
                                              const std::string& instance) const {
    auto iface_it = data_.find(interface);
    if (iface_it == data_.end()) return std::nullopt;
    auto inst_it = iface_it->second.find(instance);
    if (inst_it == iface_it->second.end() || inst_it->second.empty()) return std::nullopt;
    return inst_it->second.back();
}

RangePage EventStore::range(const std::string& interface, const std::string& instance, double from,
                            double to, size_t limit, const std::string& token) const {
    if (from > to) throw StoreError("inverted range: from > to");
    RangePage page;
    auto iface_it = data_.find(interface);
    if (iface_it == data_.end()) return page;

    std::optional<Token> resume;
    if (!token.empty()) resume = decode_token(token);

    // Gather candidates in (time, instance, sequence) order. Per-instance
    // vectors are already time-ordered, so a merge would do; a sort keeps the
    // code obvious at desk scale.
    std::vector<const StoredEvent*> hits;
    auto consider = [&](const std::vector<StoredEvent>& events) {
        for (const auto& ev : events) {
            if (ev.time < from || ev.time > to) continue;
            if (resume && !after_token(ev, *resume)) continue;
            hits.push_back(&ev);
        }
    };
    if (!instance.empty()) {
        if (auto it = iface_it->second.find(instance); it != iface_it->second.end())
            consider(it->second);
    } else {
        for (const auto& [_, events] : iface_it->second) consider(events);
    }
    std::sort(hits.begin(), hits.end(), [](const StoredEvent* a, const StoredEvent* b) {
        if (a->time != b->time) return a->time < b->time;
        if (a->instance != b->instance) return a->instance < b->instance;
        return a->sequence < b->sequence;
    });

    const bool truncated = limit > 0 && hits.size() > limit;
    const size_t take = truncated ? limit : hits.size();
    page.events.reserve(take);
    for (size_t i = 0; i < take; ++i) page.events.push_back(*hits[i]);
    if (truncated) page.next_token = encode_token(page.events.back());
    return page;
}

void EventStore::flush() {
    if (dir_.empty()) return;
    if (active_.is_open()) {
        finished_segments_.back().second = active_records_;
        active_.close();
    }
    nlohmann::ordered_json index;
    index["segments"] = nlohmann::ordered_json::array();
    for (const auto& [file, records] : finished_segments_)
        index["segments"].push_back({{"file", file}, {"records", records}});
    index["totalEvents"] = total_;
    index["unknownInstanceEvents"] = unknown_;
    uint64_t keys = 0;
    for (const auto& [_, instances] : data_) keys += instances.size();
    index["keys"] = keys;
    std::ofstream out(dir_ + "/index.json", std::ios::trunc);
    out << index.dump(2) << "\n";
}

std::string EventStore::history_csv(const std::string& interface,
                                    const std::string& instance) const {
    std::ostringstream os;
    os << "time,interface,instance,sequence,payload\n";
    auto iface_it = data_.find(interface);
    if (iface_it == data_.end()) return os.str();
    auto inst_it = iface_it->second.find(instance);
    if (inst_it == iface_it->second.end()) return os.str();
    for (const auto& ev : inst_it->second) {
        std::string quoted = ev.payload;
        // CSV-quote the payload field (payloads contain commas).
        std::string escaped = "\"";
        for (char c : quoted) {
            if (c == '"') escaped += "\"\"";
            else escaped.push_back(c);
        }
        escaped.push_back('"');
        char t[32];
        snprintf(t, sizeof(t), "%.9g", ev.time);
        os << t << "," << ev.interface << "," << ev.instance << "," << ev.sequence << ","
           << escaped << "\n";
    }
    return os.str();
}

std::vector<StoredEvent> EventStore::read_segment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot open segment file '" + path + "'");
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<StoredEvent> out;
    size_t pos = 0;
    while (pos < raw.size()) {
        if (raw.size() - pos < 8) throw StoreError("truncated frame header in '" + path + "'");
        const auto* p = reinterpret_cast<const unsigned char*>(raw.data() + pos);
        const uint32_t len = get_le32(p);
        const uint32_t crc = get_le32(p + 4);
        pos += 8;
        if (raw.size() - pos < len) throw StoreError("truncated record body in '" + path + "'");
        const std::string body = raw.substr(pos, len);
        pos += len;
        if (crc_of(body) != crc) throw StoreError("checksum mismatch in '" + path + "'");
        out.push_back(decode_record(body));
    }
    return out;
}

}  // namespace ktwin
