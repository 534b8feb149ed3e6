#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktwin {

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StoredEvent {
    std::string interface;
    std::string instance;
    double time = 0.0;
    uint64_t sequence = 0;  // monotone per (interface, instance), starts at 1
    std::string payload;
    bool unknown_instance = false;
};

struct RangePage {
    std::vector<StoredEvent> events;
    std::string next_token;  // empty when the page is final
};

// Append-only per-run event log with latest-state and time-range queries.
// Default-constructed stores are memory-only; constructing with a directory
// additionally streams records into rotating segment files (little-endian
// 32-bit length prefix + crc32 per record) and writes an index at flush().
class EventStore {
public:
    EventStore() = default;
    explicit EventStore(const std::string& dir, size_t segment_limit_bytes = 1u << 20);
    ~EventStore();

    EventStore(const EventStore&) = delete;
    EventStore& operator=(const EventStore&) = delete;

    uint64_t append(const std::string& interface, const std::string& instance, double time,
                    std::string payload, bool known_instance = true);

    std::optional<StoredEvent> latest(const std::string& interface,
                                      const std::string& instance) const;

    // Time-ordered batch over [from, to]; empty instance selects the whole
    // interface. Results are totally ordered by (time, instance, sequence);
    // `limit` caps the page and yields a continuation token.
    RangePage range(const std::string& interface, const std::string& instance, double from,
                    double to, size_t limit, const std::string& token = {}) const;

    void flush();  // finalize the active segment and write index.json

    uint64_t total_events() const { return total_; }
    uint64_t unknown_instance_events() const { return unknown_; }

    // CSV export of one key's full history (header + one row per event).
    std::string history_csv(const std::string& interface, const std::string& instance) const;

    // Decodes one segment file, verifying framing and checksums.
    static std::vector<StoredEvent> read_segment(const std::string& path);

private:
    // interface -> instance -> events in append order
    std::map<std::string, std::map<std::string, std::vector<StoredEvent>>> data_;
    uint64_t total_ = 0;
    uint64_t unknown_ = 0;

    std::string dir_;
    size_t segment_limit_ = 1u << 20;
    size_t segment_bytes_ = 0;
    int segment_index_ = 0;
    std::vector<std::pair<std::string, uint64_t>> finished_segments_;  // file, records
    uint64_t active_records_ = 0;
    std::ofstream active_;

    void open_segment();
    void write_record(const StoredEvent& ev);
};

}  // namespace ktwin
