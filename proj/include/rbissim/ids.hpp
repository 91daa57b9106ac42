#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace rbissim {

struct ApId {
    std::uint32_t value = 0;
    auto operator<=>(const ApId&) const = default;
};

struct StationId {
    std::uint32_t value = 0;
    auto operator<=>(const StationId&) const = default;
};

/// Addressable endpoint in the engine.
struct NodeId {
    enum class Kind : std::uint8_t { ap, station, grandmaster, database, carriage };

    Kind kind = Kind::station;
    std::uint32_t index = 0;

    static NodeId of(ApId a) { return {Kind::ap, a.value}; }
    static NodeId of(StationId s) { return {Kind::station, s.value}; }
    static NodeId grandmaster() { return {Kind::grandmaster, 0}; }
    static NodeId database() { return {Kind::database, 0}; }
    static NodeId carriage(std::uint32_t i) { return {Kind::carriage, i}; }

    auto operator<=>(const NodeId&) const = default;
};

/// "ap1", "sta2", "gm", "db", "carriage1". Also the RNG stream prefix.
std::string to_string(NodeId n);
inline std::string to_string(ApId a) { return to_string(NodeId::of(a)); }
inline std::string to_string(StationId s) { return to_string(NodeId::of(s)); }

} // namespace rbissim
