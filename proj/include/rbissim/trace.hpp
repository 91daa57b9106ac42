#pragma once

#include "rbissim/time.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rbissim {

/// One line of a run trace: `<time_ns> <kind> <node> key=value ...`.
/// Keys and values never contain whitespace or '='.
struct TraceRecord {
    SimTime time;
    std::string kind;
    std::string node;
    std::vector<std::pair<std::string, std::string>> fields;

    std::optional<std::string_view> field(std::string_view key) const;
    /// Integer field; throws std::out_of_range if absent or malformed.
    std::int64_t int_field(std::string_view key) const;

    bool operator==(const TraceRecord&) const = default;
};

namespace trace_kind {
inline constexpr std::string_view beacon_tx = "beacon_tx";
inline constexpr std::string_view beacon_rx = "beacon_rx";
inline constexpr std::string_view beacon_lost = "beacon_lost";
inline constexpr std::string_view correction_tx = "correction_tx";
inline constexpr std::string_view correction_rx = "correction_rx";
inline constexpr std::string_view offset = "offset";
inline constexpr std::string_view bridge_publish = "bridge_publish";
inline constexpr std::string_view db_update = "db_update";
inline constexpr std::string_view db_publish = "db_publish";
inline constexpr std::string_view offset_query = "offset_query";
inline constexpr std::string_view handover = "handover";
inline constexpr std::string_view ptp_exchange = "ptp_exchange";
inline constexpr std::string_view sync_error = "sync_error";
inline constexpr std::string_view unsynchronized = "unsynchronized";
inline constexpr std::string_view motion_trigger = "motion_trigger";
} // namespace trace_kind

/// Append-only run log.
class TraceLog {
public:
    void append(TraceRecord r) { records_.push_back(std::move(r)); }
    void append(SimTime t, std::string_view kind, std::string node,
                std::vector<std::pair<std::string, std::string>> fields = {});

    const std::vector<TraceRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    void write(std::ostream& out) const;
    static TraceLog read(std::istream& in);
    void write_file(const std::filesystem::path& path) const;

    bool operator==(const TraceLog&) const = default;

private:
    std::vector<TraceRecord> records_;
};

inline std::pair<std::string, std::string> kv(std::string key, std::int64_t value)
{
    return {std::move(key), std::to_string(value)};
}

inline std::pair<std::string, std::string> kv(std::string key, std::string value)
{
    return {std::move(key), std::move(value)};
}

} // namespace rbissim
