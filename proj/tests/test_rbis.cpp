#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rbissim/rbis.hpp"
#include "rbissim/rng.hpp"

#include <algorithm>

using namespace rbissim;

namespace {

const Bssid ap_a = Bssid::parse("02:00:00:00:00:01");
const Bssid ap_b = Bssid::parse("02:00:00:00:00:02");

BeaconFrame beacon(const Bssid& b, std::uint64_t tsf) { return BeaconFrame{b, tsf, 100, "x"}; }

} // namespace

TEST_CASE("reference records copy the beacon identity and TSN receive time")
{
    ReferenceState ref;
    const auto rec = reference_on_beacon(ref, beacon(ap_a, 102'400), SimTime{} + 5_s);
    CHECK(rec == CorrectionRecord{ap_a, 102'400, SimTime{} + 5_s});

    const auto next = ref.on_beacon(beacon(ap_a, 204'800), SimTime{} + 5_s + 102'400_us);
    CHECK(next.beacon_tsf != rec.beacon_tsf);
    CHECK(ref.records_emitted() == 2);

    CHECK_THROWS_AS(ref.on_beacon(beacon(ap_a, 204'800), SimTime{} + 6_s), std::logic_error);
    CHECK_NOTHROW(ref.on_beacon(beacon(ap_b, 5), SimTime{} + 6_s));
}

TEST_CASE("tuple then correction yields the offset")
{
    StationSyncState st(ap_a);
    CHECK_FALSE(st.on_beacon(beacon(ap_a, 7), SimTime{} + 10_s).has_value());
    const auto pair = st.on_correction({ap_a, 7, SimTime{} + 10'001_ms});
    REQUIRE(pair.has_value());
    CHECK(pair->offset() == 1_ms);
    CHECK(st.current_offset() == 1_ms);
}

TEST_CASE("correction then tuple yields the same offset")
{
    StationSyncState st(ap_a);
    CHECK_FALSE(st.on_correction({ap_a, 7, SimTime{} + 10'001_ms}).has_value());
    CHECK(st.pending(ap_a).size() == 1);
    const auto pair = st.on_beacon(beacon(ap_a, 7), SimTime{} + 10_s);
    REQUIRE(pair.has_value());
    CHECK(pair->offset() == 1_ms);
    CHECK(st.pending(ap_a).empty());
}

TEST_CASE("estimate applies the pair offset and the AP term")
{
    StationSyncState st(ap_a);
    st.on_beacon(beacon(ap_a, 7), SimTime{} + 10_s);
    st.on_correction({ap_a, 7, SimTime{} + 10'001_ms});
    CHECK(estimate_tsn_time(st, SimTime{} + 12_s, SimDuration{}) == SimTime{} + 12'001_ms);
    CHECK(estimate_tsn_time(st, SimTime{} + 12_s, 5_us) == SimTime{} + 12'001_ms + 5_us);
}

TEST_CASE("estimate without a matched pair is unsynchronized")
{
    StationSyncState st(ap_a);
    CHECK_THROWS_AS(estimate_tsn_time(st, SimTime{}, SimDuration{}), UnsynchronizedError);
    st.on_beacon(beacon(ap_a, 1), SimTime{});
    CHECK_THROWS_AS(estimate_tsn_time(st, SimTime{}, SimDuration{}), UnsynchronizedError);
    // A pair for another AP does not synchronize the associated one.
    st.on_beacon(beacon(ap_b, 1), SimTime{});
    st.on_correction({ap_b, 1, SimTime{}});
    CHECK_THROWS_AS(estimate_tsn_time(st, SimTime{}, SimDuration{}), UnsynchronizedError);
    st.set_associated(ap_b);
    CHECK(estimate_tsn_time(st, SimTime{} + 1_s, SimDuration{}) == SimTime{} + 1_s);
}

TEST_CASE("unmatched tuples beyond the ring capacity evict the oldest")
{
    StationSyncState st(ap_a, 4);
    for (std::uint64_t k = 1; k <= 6; ++k) st.on_beacon(beacon(ap_a, k), SimTime{static_cast<std::int64_t>(k)});
    const auto t = st.tuples(ap_a);
    REQUIRE(t.size() == 4);
    CHECK(t.front().beacon_tsf == 3);
    CHECK(t.back().beacon_tsf == 6);

    // A correction for an evicted beacon can only be buffered.
    CHECK_FALSE(st.on_correction({ap_a, 1, SimTime{}}).has_value());
    CHECK(st.pending(ap_a).size() == 1);
    CHECK(st.on_correction({ap_a, 3, SimTime{100}}).has_value());

    for (std::uint64_t k = 10; k < 20; ++k) st.on_correction({ap_a, k, SimTime{}});
    const auto p = st.pending(ap_a);
    REQUIRE(p.size() == 4);
    CHECK(p.front().beacon_tsf == 16);
    CHECK_THROWS_AS(StationSyncState(ap_a, 0), std::invalid_argument);
}

TEST_CASE("duplicate records and beacons leave the state unchanged")
{
    StationSyncState st(ap_a);
    st.on_beacon(beacon(ap_a, 1), SimTime{} + 1_s);
    st.on_correction({ap_a, 2, SimTime{} + 3_s});
    st.on_correction({ap_a, 1, SimTime{} + 2_s});
    const StationSyncState before = st;

    CHECK_FALSE(st.on_correction({ap_a, 1, SimTime{} + 2_s}).has_value());
    CHECK_FALSE(st.on_correction({ap_a, 2, SimTime{} + 3_s}).has_value());
    CHECK_FALSE(st.on_beacon(beacon(ap_a, 1), SimTime{} + 1_s).has_value());
    CHECK(st == before);

    CHECK(station_on_correction(before, {ap_a, 1, SimTime{} + 2_s}) == before);
}

TEST_CASE("matching is order independent")
{
    RngState rng(derive_stream_seed(1, "test/order"));
    for (int trial = 0; trial < 500; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(1, 16));
        std::vector<BeaconTuple> tuples;
        std::vector<CorrectionRecord> recs;
        for (int k = 0; k < n; ++k) {
            const Bssid& b = rng.bernoulli(0.5) ? ap_a : ap_b;
            const SimTime local{k * 102'400'000LL + rng.uniform_int(0, 1000)};
            tuples.push_back({b, static_cast<std::uint64_t>(100 + k), local});
            recs.push_back({b, static_cast<std::uint64_t>(100 + k), local + SimDuration{rng.uniform_int(-5'000'000, 5'000'000)}});
        }

        // Beacons keep their local order; corrections arrive shuffled and interleaved.
        StationSyncState in_order(ap_a);
        for (const auto& t : tuples) in_order.on_beacon(beacon(t.bssid, t.beacon_tsf), t.local_rx_time);
        for (const auto& r : recs) in_order.on_correction(r);

        std::vector<CorrectionRecord> shuffled = recs;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
        StationSyncState mixed(ap_a);
        std::size_t bi = 0;
        std::size_t ci = 0;
        while (bi < tuples.size() || ci < shuffled.size()) {
            const bool take_beacon = ci == shuffled.size() || (bi < tuples.size() && rng.bernoulli(0.5));
            if (take_beacon) {
                mixed.on_beacon(beacon(tuples[bi].bssid, tuples[bi].beacon_tsf), tuples[bi].local_rx_time);
                ++bi;
            }
            else {
                mixed.on_correction(shuffled[ci++]);
            }
        }
        REQUIRE(mixed == in_order);
        REQUIRE(mixed.current_offset() == in_order.current_offset());
    }
}

TEST_CASE("the latest pair is chosen by local receive time")
{
    StationSyncState st(ap_a);
    st.on_beacon(beacon(ap_a, 1), SimTime{} + 1_s);
    st.on_beacon(beacon(ap_a, 2), SimTime{} + 2_s);
    st.on_correction({ap_a, 2, SimTime{} + 2_s + 7_us});
    st.on_correction({ap_a, 1, SimTime{} + 1_s + 3_us});
    CHECK(st.current_offset() == 7_us);
    CHECK(st.latest_correction(ap_a)->beacon_tsf == 2);
}

TEST_CASE("drift times age is the error of a stale pair")
{
    // Reference and TSN time are ideal; the station runs 10 ppm fast.
    const ClockModel station(SimDuration{}, Drift::from_ppm(10.0), 1_ns, JitterSpec::none());
    RngState rng(0);
    const SimTime t_rx = SimTime{} + 1_s;

    StationSyncState st(ap_a);
    st.on_beacon(beacon(ap_a, 1'000'000), clock_read(station, t_rx, rng));
    st.on_correction({ap_a, 1'000'000, t_rx});

    const SimTime t_now = t_rx + time_units(100);
    const SimTime est = estimate_tsn_time(st, clock_read(station, t_now, rng), SimDuration{});
    CHECK(est - t_now == 1024_ns);
}

TEST_CASE("a lost reference record keeps the previous offset and the error grows with the gap")
{
    const ClockModel station(SimDuration{} + 3_ms, Drift::from_ppm(-20.0), 1_ns, JitterSpec::none());
    RngState rng(0);
    ReferenceState ref;
    StationSyncState st(ap_a);

    const SimDuration bi = time_units(100);
    SimTime last_matched{};
    for (int k = 0; k < 10; ++k) {
        const SimTime t = SimTime{} + 2_s + bi * k;
        const BeaconFrame f = beacon(ap_a, static_cast<std::uint64_t>((t - SimTime{}).ns / 1000));
        st.on_beacon(f, clock_read(station, t, rng));
        if (k == 5 || k == 6) continue; // the reference missed these
        st.on_correction(ref.on_beacon(f, t));
        last_matched = t;
    }
    // The ninth beacon was matched; check the estimate just before the next one.
    const SimTime probe = last_matched + bi - 1_us;
    const SimTime est = estimate_tsn_time(st, clock_read(station, probe, rng), SimDuration{});
    CHECK(est - probe == SimDuration{floor_div(-(bi - 1_us).ns, 50'000)});

    // With only the gap beacons missing, the estimate ages across them.
    StationSyncState gap(ap_a);
    ReferenceState ref2;
    for (int k = 0; k < 7; ++k) {
        const SimTime t = SimTime{} + 2_s + bi * k;
        const BeaconFrame f = beacon(ap_a, static_cast<std::uint64_t>((t - SimTime{}).ns / 1000));
        gap.on_beacon(f, clock_read(station, t, rng));
        if (k < 5) gap.on_correction(ref2.on_beacon(f, t));
    }
    const SimTime stale_at = SimTime{} + 2_s + bi * 4;
    const SimTime probe2 = stale_at + bi * 3;
    const SimTime est2 = estimate_tsn_time(gap, clock_read(station, probe2, rng), SimDuration{});
    CHECK(est2 - probe2 == SimDuration{-(bi * 3).ns / 50'000});
}

TEST_CASE("zero-noise estimates are exact for arbitrary clock offsets")
{
    RngState pick(9);
    for (int k = 0; k < 1000; ++k) {
        const ClockModel station(SimDuration{pick.uniform_int(-1'000'000'000'000, 1'000'000'000'000)}, Drift{}, 1_ns,
                                 JitterSpec::none());
        RngState unused(0);
        const SimTime t_rx{pick.uniform_int(0, 1'000'000'000'000)};
        StationSyncState st(ap_a);
        st.on_beacon(beacon(ap_a, 1), clock_read(station, t_rx, unused));
        st.on_correction({ap_a, 1, t_rx});
        const SimTime t_now = t_rx + SimDuration{pick.uniform_int(0, 10'000'000'000)};
        REQUIRE(estimate_tsn_time(st, clock_read(station, t_now, unused), SimDuration{}) == t_now);
    }
}

TEST_CASE("bridge: AP2 powered on 7 s after AP1 gives delta(1,2) = -7 s")
{
    // Ideal clocks; TSF counts true time since each AP's power-on.
    const SimTime epoch1{};
    const SimTime epoch2 = SimTime{} + 7_s;
    const auto tsf_at = [](SimTime t, SimTime epoch) { return static_cast<std::uint64_t>((t - epoch).ns / 1000); };
    const ClockModel bridge_clock(SimDuration{} + 250_ms, Drift{}, 1_ns, JitterSpec::none());
    RngState rng(0);

    const SimTime t1 = SimTime{} + 9_s;
    const SimTime t2 = SimTime{} + 9_s + 40'123_us;
    const BeaconFrame b1 = beacon(ap_a, tsf_at(t1, epoch1));
    const BeaconFrame b2 = beacon(ap_b, tsf_at(t2, epoch2));

    StationSyncState bridge(ap_a);
    bridge.on_beacon(b1, clock_read(bridge_clock, t1, rng));
    bridge.on_correction({ap_a, b1.tsf_timestamp, t1});
    bridge.on_beacon(b2, clock_read(bridge_clock, t2, rng));

    const ApLabel l1{ApId{1}, ap_a};
    const ApLabel l2{ApId{2}, ap_b};
    const BridgeResult r = bridge_compute_ap_offset(bridge, l1, l2, StationId{2}, SimTime{} + 10_s);
    CHECK(r.offset.delta == -7_s);
    CHECK(r.offset.ap_i == ApId{1});
    CHECK(r.offset.ap_j == ApId{2});
    CHECK(r.offset.reporter == StationId{2});
    CHECK(r.derived == CorrectionRecord{ap_b, b2.tsf_timestamp, t2});

    CHECK(bridge_compute_ap_offset(bridge, l1, l1, StationId{2}, SimTime{}).offset.delta == SimDuration{});
    CHECK_THROWS_AS(bridge_compute_ap_offset(bridge, l2, l1, StationId{2}, SimTime{}), NotABridgeError);
    StationSyncState only_a(ap_a);
    only_a.on_beacon(b1, SimTime{});
    only_a.on_correction({ap_a, b1.tsf_timestamp, t1});
    CHECK_THROWS_AS(bridge_compute_ap_offset(only_a, l1, l2, StationId{2}, SimTime{}), NotABridgeError);

    // A station on AP2, out of the reference's range, with an unrelated clock.
    const ClockModel mobile(SimDuration{} - 3'456_ms, Drift{}, 1_ns, JitterSpec::none());
    StationSyncState st(ap_b);
    st.on_correction({ap_a, b1.tsf_timestamp, t1});
    const SimTime t3 = SimTime{} + 9_s + 142'523_us;
    st.on_beacon(beacon(ap_b, tsf_at(t3, epoch2)), clock_read(mobile, t3, rng));

    const SimTime t_now = SimTime{} + 9'200_ms + 17_ns;
    const SimDuration dt = -r.offset.delta; // delta(2, 1)
    CHECK(estimate_tsn_time_via(st, ap_a, clock_read(mobile, t_now, rng), dt) == t_now);

    // Derived records give the same answer through the plain estimate.
    const SimTime t5 = t2 + 160_ms;
    StationSyncState st2(ap_b);
    st2.on_beacon(b2, clock_read(mobile, t2, rng));
    st2.on_correction(r.derived);
    CHECK(estimate_tsn_time(st2, clock_read(mobile, t5, rng), SimDuration{}) == t5);
}

TEST_CASE("cross-AP estimate needs a beacon from the associated AP and a record for the anchor")
{
    StationSyncState st(ap_b);
    CHECK_THROWS_AS(estimate_tsn_time_via(st, ap_a, SimTime{}, SimDuration{}), UnsynchronizedError);
    st.on_beacon(beacon(ap_b, 5), SimTime{});
    CHECK_THROWS_AS(estimate_tsn_time_via(st, ap_a, SimTime{}, SimDuration{}), UnsynchronizedError);
    st.on_correction({ap_a, 9, SimTime{} + 9_us});
    CHECK_NOTHROW(estimate_tsn_time_via(st, ap_a, SimTime{}, SimDuration{}));
}
