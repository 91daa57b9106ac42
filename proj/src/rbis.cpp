#include "rbissim/rbis.hpp"

#include "rbissim/wire.hpp"

#include <algorithm>

namespace rbissim {

std::vector<std::uint8_t> encode_correction(const CorrectionRecord& rec)
{
    std::vector<std::uint8_t> out(rec.bssid.octets.begin(), rec.bssid.octets.end());
    wire::put_le(out, rec.beacon_tsf);
    wire::put_le(out, rec.tsn_rx_time.ns);
    return out;
}

CorrectionRecord decode_correction(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < correction_wire_length)
        throw std::invalid_argument("truncated correction record: " + std::to_string(bytes.size()) + " bytes");
    CorrectionRecord rec;
    std::copy(bytes.begin(), bytes.begin() + 6, rec.bssid.octets.begin());
    rec.beacon_tsf = wire::get_le<std::uint64_t>(bytes.subspan(6));
    rec.tsn_rx_time = SimTime{wire::get_le<std::int64_t>(bytes.subspan(14))};
    return rec;
}

CorrectionRecord ReferenceState::on_beacon(const BeaconFrame& frame, SimTime tsn_rx)
{
    auto [it, inserted] = last_tsf_.try_emplace(frame.bssid, frame.tsf_timestamp);
    if (!inserted) {
        if (frame.tsf_timestamp <= it->second)
            throw std::logic_error("beacon TSF " + std::to_string(frame.tsf_timestamp) + " of " +
                                   frame.bssid.to_string() + " does not advance");
        it->second = frame.tsf_timestamp;
    }
    ++emitted_;
    return {frame.bssid, frame.tsf_timestamp, tsn_rx};
}

StationSyncState::StationSyncState(Bssid associated, std::size_t ring_capacity)
    : associated_(associated), capacity_(ring_capacity)
{
    if (capacity_ == 0) throw std::invalid_argument("ring capacity must be positive");
}

void StationSyncState::consider(PerAp& ap, const MatchedPair& pair)
{
    if (!ap.latest || ap.latest->tuple.local_rx_time < pair.tuple.local_rx_time) ap.latest = pair;
}

std::optional<MatchedPair> StationSyncState::on_beacon(const BeaconFrame& frame, SimTime local_rx)
{
    auto& ap = aps_[frame.bssid];
    const BeaconTuple tuple{frame.bssid, frame.tsf_timestamp, local_rx};
    if (std::any_of(ap.tuples.begin(), ap.tuples.end(), [&](const auto& t) { return t.id() == tuple.id(); }))
        return std::nullopt;

    ap.tuples.push_back(tuple);
    if (ap.tuples.size() > capacity_) ap.tuples.pop_front();

    auto rec = std::find_if(ap.pending.begin(), ap.pending.end(), [&](const auto& r) { return r.id() == tuple.id(); });
    if (rec == ap.pending.end()) return std::nullopt;
    const MatchedPair pair{tuple, *rec};
    consider(ap, pair);
    ap.pending.erase(rec);
    return pair;
}

std::optional<MatchedPair> StationSyncState::on_correction(const CorrectionRecord& rec)
{
    auto& ap = aps_[rec.bssid];
    auto tuple = std::find_if(ap.tuples.begin(), ap.tuples.end(), [&](const auto& t) { return t.id() == rec.id(); });
    if (tuple != ap.tuples.end()) {
        const MatchedPair pair{*tuple, rec};
        if (ap.latest == pair) return std::nullopt;
        consider(ap, pair);
        return pair;
    }
    if (std::any_of(ap.pending.begin(), ap.pending.end(), [&](const auto& r) { return r.id() == rec.id(); }))
        return std::nullopt;
    ap.pending.push_back(rec);
    if (ap.pending.size() > capacity_) ap.pending.pop_front();
    return std::nullopt;
}

std::optional<MatchedPair> StationSyncState::latest_pair(const Bssid& ap) const
{
    const auto it = aps_.find(ap);
    if (it == aps_.end()) return std::nullopt;
    return it->second.latest;
}

std::optional<BeaconTuple> StationSyncState::latest_tuple(const Bssid& ap) const
{
    const auto it = aps_.find(ap);
    if (it == aps_.end() || it->second.tuples.empty()) return std::nullopt;
    return *std::max_element(it->second.tuples.begin(), it->second.tuples.end(),
                             [](const auto& a, const auto& b) { return a.local_rx_time < b.local_rx_time; });
}

std::optional<CorrectionRecord> StationSyncState::latest_correction(const Bssid& ap) const
{
    const auto it = aps_.find(ap);
    if (it == aps_.end()) return std::nullopt;
    std::optional<CorrectionRecord> best;
    if (it->second.latest) best = it->second.latest->correction;
    for (const auto& r : it->second.pending)
        if (!best || best->beacon_tsf < r.beacon_tsf) best = r;
    return best;
}

std::optional<SimDuration> StationSyncState::current_offset() const
{
    const auto pair = latest_pair(associated_);
    if (!pair) return std::nullopt;
    return pair->offset();
}

std::vector<BeaconTuple> StationSyncState::tuples(const Bssid& ap) const
{
    const auto it = aps_.find(ap);
    if (it == aps_.end()) return {};
    return {it->second.tuples.begin(), it->second.tuples.end()};
}

std::vector<CorrectionRecord> StationSyncState::pending(const Bssid& ap) const
{
    const auto it = aps_.find(ap);
    if (it == aps_.end()) return {};
    return {it->second.pending.begin(), it->second.pending.end()};
}

SimTime estimate_tsn_time(const StationSyncState& st, SimTime local_now, SimDuration dt_ap)
{
    const auto pair = st.latest_pair(st.associated());
    if (!pair) throw UnsynchronizedError("no matched beacon pair for " + st.associated().to_string());
    return local_now + pair->offset() + dt_ap;
}

SimTime estimate_tsn_time_via(const StationSyncState& st, const Bssid& via, SimTime local_now, SimDuration dt_ap)
{
    const auto tuple = st.latest_tuple(st.associated());
    if (!tuple) throw UnsynchronizedError("no beacon received from " + st.associated().to_string());
    const auto rec = st.latest_correction(via);
    if (!rec) throw UnsynchronizedError("no reference record for " + via.to_string());

    const SimDuration anchor_via = rec->tsn_rx_time - (SimTime{} + tsf_to_duration(rec->beacon_tsf));
    const SimTime tsn_at_beacon = SimTime{} + tsf_to_duration(tuple->beacon_tsf) + anchor_via;
    return tsn_at_beacon - tuple->local_rx_time + local_now + dt_ap;
}

BridgeResult bridge_compute_ap_offset(const StationSyncState& st, const ApLabel& ap_i, const ApLabel& ap_j,
                                      StationId reporter, SimTime measured_at)
{
    const auto pair_i = st.latest_pair(ap_i.bssid);
    if (!pair_i) throw NotABridgeError("no matched pair for " + ap_i.bssid.to_string());
    if (ap_i.id == ap_j.id) return {{ap_i.id, ap_j.id, {}, measured_at, reporter}, pair_i->correction};

    const auto tuple_j = st.latest_tuple(ap_j.bssid);
    if (!tuple_j) throw NotABridgeError("no beacon tuple for " + ap_j.bssid.to_string());

    const CorrectionRecord derived{ap_j.bssid, tuple_j->beacon_tsf, tuple_j->local_rx_time + pair_i->offset()};
    const auto anchor = [](const CorrectionRecord& r) {
        return r.tsn_rx_time - (SimTime{} + tsf_to_duration(r.beacon_tsf));
    };
    const SimDuration delta = anchor(pair_i->correction) - anchor(derived);
    return {{ap_i.id, ap_j.id, delta, measured_at, reporter}, derived};
}

} // namespace rbissim
