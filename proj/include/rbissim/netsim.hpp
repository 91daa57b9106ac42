#pragma once

#include "rbissim/beacon.hpp"
#include "rbissim/clock.hpp"
#include "rbissim/ids.hpp"
#include "rbissim/offsetdb.hpp"
#include "rbissim/rbis.hpp"
#include "rbissim/rng.hpp"
#include "rbissim/trace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rbissim {

// ---------------------------------------------------------------------------
// Frames carried by the engine

struct PtpMessage {
    enum class Type : std::uint8_t { sync, delay_req };

    Type type = Type::sync;
    std::uint32_t exchange = 0;
};

struct OffsetQuery {
    StationId station;
    ApId from;
    ApId to;
};

struct OffsetReply {
    ApId from;
    ApId to;
    std::optional<SimDuration> delta;
};

using Frame = std::variant<BeaconFrame, CorrectionRecord, ApPairOffset, OffsetMatrix, OffsetQuery, OffsetReply,
                           PtpMessage>;

std::string_view frame_kind(const Frame& f);

// ---------------------------------------------------------------------------
// Events

struct BeaconTx {
    ApId ap;
};

struct FrameDelivery {
    NodeId to;
    NodeId from;
    Frame frame;
};

struct TimerExpiry {
    NodeId node;
    std::uint32_t tag = 0;
    std::uint32_t arg = 0;
};

struct MotionTrigger {
    std::uint32_t carriage = 0;
};

using EventPayload = std::variant<BeaconTx, FrameDelivery, TimerExpiry, MotionTrigger>;

struct Event {
    SimTime fire_time;
    /// Insertion counter; breaks ties between equal fire times (FIFO).
    std::uint64_t seq = 0;
    EventPayload payload;
};

std::string describe(const Event& e);

class Engine;

class EventHandler {
public:
    virtual ~EventHandler() = default;
    virtual void handle(Engine& engine, const Event& event) = 0;
};

/// Raised when a handler fails; carries the offending event's description.
class EngineError : public std::runtime_error {
public:
    EngineError(const Event& event, const std::string& what);

    SimTime fire_time() const { return fire_time_; }
    std::uint64_t seq() const { return seq_; }

private:
    SimTime fire_time_;
    std::uint64_t seq_;
};

/// Single-threaded discrete-event engine.
///
/// Events run in (fire_time, seq) order. Randomness is drawn from named
/// streams derived from the master seed (see derive_stream_seed), so the
/// trace is a pure function of the scenario and the seed.
class Engine {
public:
    explicit Engine(std::uint64_t master_seed = 0);

    SimTime now() const { return now_; }
    std::uint64_t master_seed() const { return master_seed_; }

    /// Schedules an event; `at` must not lie in the past. Returns its seq.
    std::uint64_t schedule(SimTime at, EventPayload payload);
    std::size_t pending_events() const { return queue_.size(); }
    std::uint64_t executed_events() const { return executed_; }

    /// Runs every event with fire_time <= t_end, then advances now to t_end.
    const TraceLog& run_until(SimTime t_end, EventHandler& handler);

    TraceLog& trace() { return trace_; }
    const TraceLog& trace() const { return trace_; }

    /// The RNG stream named `key`, created on first use.
    RngState& stream(std::string_view key);

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.fire_time != b.fire_time ? a.fire_time > b.fire_time : a.seq > b.seq;
        }
    };

    std::uint64_t master_seed_;
    SimTime now_{};
    std::uint64_t next_seq_ = 0;
    std::uint64_t executed_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::map<std::string, RngState, std::less<>> streams_;
    TraceLog trace_;
};

// ---------------------------------------------------------------------------
// Topology and links

struct WirelessLinkModel {
    SimDuration propagation_delay{};
    /// Per-receiver timestamping noise.
    JitterSpec receiver_jitter{};
    double loss_probability = 0.0;

    bool operator==(const WirelessLinkModel&) const = default;
};

struct WiredLinkModel {
    SimDuration delay{};
    bool operator==(const WiredLinkModel&) const = default;
};

struct ApNode {
    ApId id;
    /// Contention and queueing before a broadcast; one draw per frame,
    /// shared by all receivers.
    JitterSpec sender_access_delay{};
    bool operator==(const ApNode&) const = default;
};

struct StationNode {
    StationId id;
    std::set<ApId> in_range;
    ApId associated;
    bool operator==(const StationNode&) const = default;
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Topology {
public:
    std::vector<ApNode> aps;
    std::vector<StationNode> stations;
    StationId reference_station;
    WirelessLinkModel default_link{};
    /// Per-(AP, station) overrides of default_link.
    std::map<std::pair<ApId, StationId>, WirelessLinkModel> links;
    /// Wired segment between reference, grandmaster and database.
    WiredLinkModel wired{};

    const ApNode& ap(ApId id) const;
    const StationNode& station(StationId id) const;
    StationNode& station(StationId id);
    bool has_ap(ApId id) const;
    bool has_station(StationId id) const;

    const WirelessLinkModel& link(ApId ap, StationId sta) const;

    /// Stations in range of `ap`, ascending by id.
    std::vector<StationId> receivers(ApId ap) const;

    /// Every violated invariant, empty when the topology is valid.
    std::vector<std::string> violations() const;

    bool operator==(const Topology&) const = default;
};

/// Re-associates `station` with `to_ap`; other per-AP state is untouched.
Topology handover(Topology topology, StationId station, ApId to_ap);

struct ScheduledDelivery {
    StationId receiver;
    SimTime at;
    std::uint64_t seq;
};

/// Broadcasts `frame` from `sender` at true time `t_tx`.
///
/// Draws one sender access delay d_s, then for every in-range receiver r
/// (ascending id) that does not lose the frame schedules a FrameDelivery at
///   t_tx + d_s + propagation(sender, r) + receiver_jitter(r).
/// Lost frames are recorded in the trace as beacon_lost / frame_lost.
std::vector<ScheduledDelivery> broadcast(Engine& engine, const Topology& topology, ApId sender, const Frame& frame,
                                         SimTime t_tx);

/// RNG stream names used by the network layer.
std::string access_stream(ApId ap);
std::string rx_jitter_stream(StationId sta);
std::string loss_stream(StationId sta);

} // namespace rbissim
