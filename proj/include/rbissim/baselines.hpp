#pragma once

// Two-way (sender/receiver) time transfer used as comparison methods:
// wired gPTP and IEEE 1588 carried over plain Wi-Fi.
//
// Both are modeled as one Sync / Delay_Req exchange per interval. Timestamps
// t1..t4 are clock readings at the transmit and receive instants; any delay
// between timestamping and the medium (queueing, contention) ends up in the
// one-way delays and, where it differs between directions, in the estimate.

#include "rbissim/clock.hpp"
#include "rbissim/ids.hpp"
#include "rbissim/netsim.hpp"
#include "rbissim/trace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rbissim {

struct TwoWayExchange {
    SimTime t1; ///< master tx, master clock
    SimTime t2; ///< slave rx, slave clock
    SimTime t3; ///< slave tx, slave clock
    SimTime t4; ///< master rx, master clock

    bool operator==(const TwoWayExchange&) const = default;
};

/// Slave-minus-master offset ((t2 - t1) - (t4 - t3)) / 2, rounded toward
/// negative infinity. Its error is half the forward/backward delay asymmetry.
SimDuration ptp_offset_estimate(const TwoWayExchange& x);

/// One direction of a two-way exchange.
struct PathModel {
    SimDuration delay{};
    /// Medium access / queueing between timestamping and transmission.
    JitterSpec access_delay{};
    JitterSpec receiver_jitter{};

    bool operator==(const PathModel&) const = default;
};

struct PtpConfig {
    ClockModel master_clock{};
    ClockModel slave_clock{};
    PathModel forward{};  ///< master -> slave
    PathModel backward{}; ///< slave -> master
    SimDuration sync_interval = SimDuration::milliseconds(125);
    /// Delay between Sync reception and Delay_Req transmission.
    SimDuration turnaround{};
    std::uint32_t exchanges = 1000;
    std::uint64_t seed = 1;
};

struct PtpRunResult {
    /// Estimated minus true TSN time at each exchange completion.
    std::vector<SimDuration> errors;
    TraceLog trace;
};

/// Wired exchange: both paths must have no access delay.
PtpRunResult run_gptp_wired(const PtpConfig& config);
/// Exchange through a contended wireless medium.
PtpRunResult run_ptp_over_wifi(const PtpConfig& config);

/// Grandmaster plus any number of slaves running periodic two-way exchanges
/// on a shared engine. The grandmaster's nominal clock is TSN time.
class PtpSession {
public:
    static constexpr std::uint32_t tag_sync = 100;
    static constexpr std::uint32_t tag_delay_req = 101;

    PtpSession(ClockModel master_clock, SimDuration sync_interval, SimDuration turnaround);

    void add_slave(StationId id, ClockModel clock, PathModel forward, PathModel backward);

    /// Schedules the first Sync for every slave at `first`.
    void start(Engine& engine, SimTime first, std::uint32_t max_exchanges = UINT32_MAX);

    /// Processes PTP events; returns false for events that are not its own.
    bool handle(Engine& engine, const Event& event);

    /// Latest slave-minus-master offset estimate.
    std::optional<SimDuration> offset_estimate(StationId id) const;
    const std::vector<SimDuration>& errors(StationId id) const;
    std::uint32_t completed(StationId id) const;

private:
    struct Slave {
        StationId id;
        ClockModel clock;
        PathModel forward;
        PathModel backward;
        std::map<std::uint32_t, TwoWayExchange> in_flight;
        std::uint32_t next_exchange = 0;
        std::uint32_t completed = 0;
        std::optional<SimDuration> estimate;
        std::vector<SimDuration> errors;
    };

    Slave& slave(StationId id);
    const Slave& slave(StationId id) const;
    void send_sync(Engine& engine, Slave& s);

    ClockModel master_clock_;
    SimDuration interval_;
    SimDuration turnaround_;
    std::uint32_t max_exchanges_ = UINT32_MAX;
    std::vector<Slave> slaves_;
};

} // namespace rbissim
