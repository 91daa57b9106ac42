#pragma once

#include "rbissim/clock.hpp"
#include "rbissim/time.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rbissim {

/// 48-bit BSS identifier (the AP's MAC address).
struct Bssid {
    std::array<std::uint8_t, 6> octets{};

    static Bssid parse(std::string_view text);
    std::string to_string() const;

    auto operator<=>(const Bssid&) const = default;
};

inline constexpr std::size_t max_ssid_length = 32;
inline constexpr std::size_t beacon_header_length = 38;

struct BeaconFrame {
    Bssid bssid;
    /// TSF counter in microseconds since AP power-on.
    std::uint64_t tsf_timestamp = 0;
    std::uint16_t beacon_interval_tu = 100;
    std::string ssid;

    bool operator==(const BeaconFrame&) const = default;
};

/// Beacon identity: TSF is strictly increasing per AP, so (bssid, tsf)
/// never repeats.
struct BeaconId {
    Bssid bssid;
    std::uint64_t tsf = 0;
    auto operator<=>(const BeaconId&) const = default;
};

inline BeaconId identity_of(const BeaconFrame& f) { return {f.bssid, f.tsf_timestamp}; }

/// TSF timestamp expressed in simulator nanoseconds.
constexpr SimDuration tsf_to_duration(std::uint64_t tsf_us)
{
    return SimDuration::microseconds(static_cast<std::int64_t>(tsf_us));
}

struct ApState {
    Bssid bssid;
    std::string ssid;
    /// True time at which the AP powered on (TSF = 0).
    SimTime tsf_epoch{};
    ClockModel tsf_clock{};
    std::uint16_t beacon_interval_tu = 100;
};

class BeaconError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds the beacon the AP would transmit at `true_time`.
/// Throws BeaconError if the AP is not yet powered on.
BeaconFrame make_beacon(const ApState& ap, SimTime true_time, RngState& rng);

/// Management-frame subset: header, TSF, interval, capability, SSID element.
/// Multi-byte integers are little-endian. Throws BeaconError for SSIDs over 32 bytes.
std::vector<std::uint8_t> encode_beacon(const BeaconFrame& frame);

/// Strict inverse of encode_beacon. Trailing tagged elements are ignored.
BeaconFrame decode_beacon(std::span<const std::uint8_t> bytes);

} // namespace rbissim
