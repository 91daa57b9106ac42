#pragma once

// Scenario files: a TOML description of topology, clocks, method and run
// parameters.
//
// Duration-valued keys take a unit suffix (_ns, _us, _ms or _s) and at most one
// spelling of each key may appear. Integer values are exact; fractional values
// are rounded to the nearest nanosecond. Unknown keys are errors.

#include "rbissim/beacon.hpp"
#include "rbissim/clock.hpp"
#include "rbissim/demonstrator.hpp"
#include "rbissim/ids.hpp"
#include "rbissim/netsim.hpp"
#include "rbissim/offsetdb.hpp"
#include "rbissim/time.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rbissim {

enum class Method { rbis, gptp_wired, ptp_wifi };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

/// How a station associated with an AP that the reference cannot hear
/// obtains TSN time.
enum class CrossApRoute {
    /// Anchor through a reference-covered AP and the database offset.
    offset_matrix,
    /// Use correction records that bridges derive for the far AP.
    derived,
};

enum class DisseminationMode { unicast, broadcast };

struct ApConfig {
    ApId id;
    Bssid bssid;
    std::string ssid;
    std::uint16_t beacon_interval_tu = 100;
    /// True time of power-on (TSF = 0). The first beacon is sent at
    /// max(0, tsf_epoch).
    SimTime tsf_epoch{};
    ClockModel tsf_clock{};
    JitterSpec access_delay{};

    bool operator==(const ApConfig&) const = default;
};

struct StationConfig {
    StationId id;
    std::set<ApId> in_range;
    ApId associated;
    ClockModel clock{};
    /// (i, j) pairs this station measures offsets for: i must be heard by the
    /// reference, j must not.
    std::vector<std::pair<ApId, ApId>> bridges;
    /// Medium access on the station's uplink (PTP over Wi-Fi Delay_Req).
    JitterSpec uplink_access_delay{};

    bool operator==(const StationConfig&) const = default;
};

struct LinkConfig {
    ApId ap;
    StationId station;
    WirelessLinkModel model;

    bool operator==(const LinkConfig&) const = default;
};

struct HandoverStep {
    SimTime at;
    StationId station;
    ApId to_ap;

    bool operator==(const HandoverStep&) const = default;
};

struct DisseminationConfig {
    DisseminationMode mode = DisseminationMode::unicast;
    SimDuration latency = SimDuration::milliseconds(2);
    JitterSpec jitter{};

    bool operator==(const DisseminationConfig&) const = default;
};

struct OffsetDbConfig {
    PublishPolicy policy{};
    double channel_busy = 0.0;
    /// One-way latency of queries, replies and published snapshots.
    SimDuration latency = SimDuration::milliseconds(1);

    bool operator==(const OffsetDbConfig&) const = default;
};

struct PtpScenarioConfig {
    ClockModel master_clock{};
    SimDuration sync_interval = SimDuration::milliseconds(125);
    SimDuration turnaround{};
    /// Wired one-way delay grandmaster <-> slave (gptp_wired) or
    /// grandmaster <-> AP (ptp_wifi).
    SimDuration wired_delay = SimDuration::nanoseconds(500);
    /// Extra delay added to the master-to-slave direction only.
    SimDuration wired_asymmetry{};

    bool operator==(const PtpScenarioConfig&) const = default;
};

struct DemonstratorConfig {
    /// Station driving carriage 1 and carriage 2.
    StationId station_a;
    StationId station_b;
    /// Scheduled TSN instant of the synchronized start.
    SimTime trigger_at;
    /// The stations compute their local trigger times this long beforehand.
    SimDuration arm_lead = SimDuration::milliseconds(50);
    MotionProfile profile{};
    JitterSpec gpio_latency = JitterSpec::uniform(SimDuration{}, SimDuration::microseconds(250));
    bool sensor_noise = false;
    SensorModel sensor{};
    SimDuration sample_period = SimDuration::microseconds(100);

    bool operator==(const DemonstratorConfig&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    Method method = Method::rbis;
    SimDuration duration = SimDuration::seconds(10);
    /// Period of sync-error sampling at every non-reference station (rbis).
    SimDuration sample_interval = SimDuration::milliseconds(10);
    std::size_t ring_capacity = default_ring_capacity;
    CrossApRoute cross_ap_route = CrossApRoute::offset_matrix;
    /// Bound on |drift| accepted for every clock in the file.
    double max_drift_ppm = default_max_drift_ppm;

    std::vector<ApConfig> aps;
    std::vector<StationConfig> stations;
    StationId reference_station;
    WirelessLinkModel wireless{};
    std::vector<LinkConfig> links;

    DisseminationConfig dissemination{};
    OffsetDbConfig offsetdb{};
    std::vector<HandoverStep> handovers;
    PtpScenarioConfig ptp{};
    std::optional<DemonstratorConfig> demonstrator;

    const ApConfig& ap(ApId id) const;
    const StationConfig& station(StationId id) const;

    Topology topology() const;
    /// Every semantic problem, including the topology's own invariants.
    std::vector<std::string> violations() const;

    bool operator==(const Scenario&) const = default;
};

/// Raised for malformed or invalid scenario files. `problems` lists every
/// issue found; syntax errors carry their line and column.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string source, std::vector<std::string> problems);

    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical TOML form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

/// Hex FNV-1a digest of the canonical form.
std::string scenario_hash(const Scenario& s);

/// Re-parses `text` with the numeric value at dotted `path` replaced by
/// `value`. Array elements are addressed by index ("ap.0.beacon_interval_tu").
/// Throws ScenarioError if the path does not name a numeric field.
Scenario with_parameter(std::string_view text, std::string_view path, double value,
                        std::string_view source = "<scenario>");

} // namespace rbissim
