#pragma once

#include "rbissim/demonstrator.hpp"
#include "rbissim/metrics.hpp"
#include "rbissim/offsetdb.hpp"
#include "rbissim/replay.hpp"
#include "rbissim/scenario.hpp"
#include "rbissim/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rbissim {

struct ErrorSample {
    SimTime t;
    StationId station;
    SimDuration error; ///< estimated minus true TSN time
};

/// One matched beacon/record pair as seen online by a station.
struct OffsetSample {
    SimTime t;
    StationId station;
    BeaconId beacon;
    SimDuration offset; ///< tsn_rx - local_rx
};

struct DemoResult {
    SimTime trigger1;
    SimTime trigger2;
    DemoOutcome outcome;
};

struct RunResult {
    Scenario scenario;
    TraceLog trace;
    std::vector<ErrorSample> errors;
    std::vector<OffsetSample> offsets;
    std::uint64_t unsynchronized_samples = 0;
    /// Every beacon each station received, stamped with its local clock
    /// (the reference's clock is TSN time).
    std::map<StationId, std::vector<ReplayRecord>> replays;
    OffsetMatrix offset_db;
    PublishPlan publish_plan;
    std::optional<DemoResult> demo;

    std::vector<SimDuration> error_series(std::optional<StationId> station = std::nullopt) const;
    std::optional<ErrorSummary> summary() const;
};

/// Executes a validated scenario. Throws EngineError if a handler fails and
/// ScenarioError if the scenario is invalid.
RunResult run_scenario(const Scenario& scenario);

/// Largest |Δs| that still keeps the two carriages within the demonstrator's
/// tolerance.
inline constexpr double demonstrator_limit_m = 0.004;

enum class ReportFormat { json, csv };

std::string report_json(const RunResult& result);
std::string report_csv(const RunResult& result);

/// Writes trace.log, report.{json,csv}, series.csv, offset_series.csv,
/// offsets.csv, beacons_<station>.bin and, with a demonstrator, positions.csv.
void write_outputs(const RunResult& result, const std::filesystem::path& dir, ReportFormat format = ReportFormat::json);

// ---------------------------------------------------------------------------
// Offline analysis of beacon replay files

class ReplayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReplayOffset {
    BeaconId beacon;
    SimTime station_rx;
    SimTime reference_rx;
    SimDuration offset;
};

struct ReplayAnalysis {
    /// Offsets of every beacon present in both files, in station file order.
    std::vector<ReplayOffset> offsets;
    /// For each AP, the TSN time of beacon k predicted from the offset of
    /// beacon k-1 minus the reference's stamp of beacon k.
    std::vector<SimDuration> prediction_errors;
    std::optional<ErrorSummary> summary;
};

/// Throws ReplayError for duplicate beacons within a file or when the files
/// share no beacon.
ReplayAnalysis analyze_replay(std::span<const ReplayRecord> reference, std::span<const ReplayRecord> station);

// ---------------------------------------------------------------------------
// Parameter sweeps

/// Seed of the sweep run for `value`: splitmix64(master ^ fnv1a64(text)),
/// where text is the shortest decimal form of the value.
std::uint64_t sweep_seed(std::uint64_t master, double value);

struct SweepPoint {
    double value = 0;
    std::uint64_t seed = 0;
    std::optional<ErrorSummary> summary;
    std::uint64_t unsynchronized_samples = 0;
};

/// One run per value of the numeric field at `parameter` in the scenario
/// text; runs execute concurrently and are merged in input order. Throws
/// std::invalid_argument for an empty value list.
std::vector<SweepPoint> sweep(std::string_view scenario_text, std::string_view parameter, std::span<const double> values,
                              std::optional<std::uint64_t> seed_override = std::nullopt,
                              std::string_view source = "<scenario>");

std::string sweep_csv(std::string_view parameter, std::span<const SweepPoint> points);

/// Shortest round-trip decimal form.
std::string format_double(double v);

} // namespace rbissim
