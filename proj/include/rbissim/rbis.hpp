#pragma once

// Receiver/receiver synchronization over AP beacons.
//
// A wired reference station stamps every beacon it hears with TSN time and
// disseminates (bssid, tsf, tsn_rx) records. Every other station stamps the
// same beacons with its free-running local clock. A matched pair of the two
// stamps yields the station's offset to TSN time:
//
//   t_tsn = tsn_rx - local_rx + local_now + dt_ap
//
// where dt_ap is zero when the pair's AP is the one the station uses, and the
// AP-to-AP offset otherwise. Delay on the sender side (AP queueing, medium
// access) is common to both receptions and cancels in the difference.

#include "rbissim/beacon.hpp"
#include "rbissim/ids.hpp"
#include "rbissim/time.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rbissim {

struct CorrectionRecord {
    Bssid bssid;
    std::uint64_t beacon_tsf = 0;
    /// TSN time at the reference station's reception of the beacon.
    SimTime tsn_rx_time;

    BeaconId id() const { return {bssid, beacon_tsf}; }
    bool operator==(const CorrectionRecord&) const = default;
};

inline constexpr std::size_t correction_wire_length = 22;

/// 6-byte bssid, 8-byte LE beacon_tsf (µs), 8-byte LE tsn_rx_time (ns).
std::vector<std::uint8_t> encode_correction(const CorrectionRecord& rec);
CorrectionRecord decode_correction(std::span<const std::uint8_t> bytes);

struct BeaconTuple {
    Bssid bssid;
    std::uint64_t beacon_tsf = 0;
    SimTime local_rx_time;

    BeaconId id() const { return {bssid, beacon_tsf}; }
    bool operator==(const BeaconTuple&) const = default;
};

struct MatchedPair {
    BeaconTuple tuple;
    CorrectionRecord correction;

    SimDuration offset() const { return correction.tsn_rx_time - tuple.local_rx_time; }
    bool operator==(const MatchedPair&) const = default;
};

/// Bookkeeping of the reference station: one record per beacon.
class ReferenceState {
public:
    /// Throws std::logic_error if the beacon does not advance its AP's TSF,
    /// which would make the record ambiguous.
    CorrectionRecord on_beacon(const BeaconFrame& frame, SimTime tsn_rx);

    std::uint64_t records_emitted() const { return emitted_; }

private:
    std::map<Bssid, std::uint64_t> last_tsf_;
    std::uint64_t emitted_ = 0;
};

inline CorrectionRecord reference_on_beacon(ReferenceState& ref, const BeaconFrame& frame, SimTime tsn_rx)
{
    return ref.on_beacon(frame, tsn_rx);
}

inline constexpr std::size_t default_ring_capacity = 16;

class UnsynchronizedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-station protocol state. Matching of beacons and correction records is
/// order independent: the final state does not depend on which arrives first.
class StationSyncState {
public:
    explicit StationSyncState(Bssid associated, std::size_t ring_capacity = default_ring_capacity);

    /// Both return the pair formed by this arrival, if any. Duplicates are
    /// ignored and return nothing.
    std::optional<MatchedPair> on_beacon(const BeaconFrame& frame, SimTime local_rx);
    std::optional<MatchedPair> on_correction(const CorrectionRecord& rec);

    void set_associated(const Bssid& ap) { associated_ = ap; }
    const Bssid& associated() const { return associated_; }
    std::size_t ring_capacity() const { return capacity_; }

    /// Most recent matched pair (by local receive time) for `ap`.
    std::optional<MatchedPair> latest_pair(const Bssid& ap) const;
    std::optional<BeaconTuple> latest_tuple(const Bssid& ap) const;
    /// Newest record for `ap`, matched or not, by beacon TSF.
    std::optional<CorrectionRecord> latest_correction(const Bssid& ap) const;

    /// Offset of the associated AP's latest pair; absent until the first match.
    std::optional<SimDuration> current_offset() const;

    /// Ring contents, oldest first.
    std::vector<BeaconTuple> tuples(const Bssid& ap) const;
    std::vector<CorrectionRecord> pending(const Bssid& ap) const;

    bool operator==(const StationSyncState&) const = default;

private:
    struct PerAp {
        std::deque<BeaconTuple> tuples;
        std::deque<CorrectionRecord> pending;
        std::optional<MatchedPair> latest;
        bool operator==(const PerAp&) const = default;
    };

    void consider(PerAp& ap, const MatchedPair& pair);

    std::map<Bssid, PerAp> aps_;
    Bssid associated_;
    std::size_t capacity_;
};

inline StationSyncState station_on_beacon(StationSyncState st, const BeaconFrame& frame, SimTime local_rx)
{
    st.on_beacon(frame, local_rx);
    return st;
}

inline StationSyncState station_on_correction(StationSyncState st, const CorrectionRecord& rec)
{
    st.on_correction(rec);
    return st;
}

/// TSN time at local clock reading `local_now`, from the associated AP's
/// most recent matched pair. Throws UnsynchronizedError without one.
SimTime estimate_tsn_time(const StationSyncState& st, SimTime local_now, SimDuration dt_ap);

/// Cross-AP estimate: the associated AP's latest beacon is anchored through
/// the reference records of `via`, and `dt_ap` must be the offset
/// delta(associated, via) as stored in the offset database.
SimTime estimate_tsn_time_via(const StationSyncState& st, const Bssid& via, SimTime local_now, SimDuration dt_ap);

/// Signed offset between the TSF epochs of two APs, expressed in TSN time:
/// delta(i, j) = anchor_i - anchor_j, anchor_k = tsn(beacon_k) - tsf(beacon_k).
struct ApPairOffset {
    ApId ap_i;
    ApId ap_j;
    SimDuration delta;
    SimTime measured_at;
    StationId reporter;

    bool operator==(const ApPairOffset&) const = default;
};

struct ApLabel {
    ApId id;
    Bssid bssid;
};

struct BridgeResult {
    ApPairOffset offset;
    /// Record for ap_j's latest beacon, TSN-stamped through ap_i's pair.
    CorrectionRecord derived;
};

class NotABridgeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Computation performed by a station in range of two APs. Requires a
/// matched pair for `ap_i` and at least one beacon tuple for `ap_j`.
BridgeResult bridge_compute_ap_offset(const StationSyncState& st, const ApLabel& ap_i, const ApLabel& ap_j,
                                      StationId reporter, SimTime measured_at);

} // namespace rbissim
