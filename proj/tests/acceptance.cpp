// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "rbissim/beacon.hpp"
#include "rbissim/offsetdb.hpp"
#include "rbissim/rbis.hpp"
#include "rbissim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace rbissim;

namespace {

const std::filesystem::path scenario_dir = RBISSIM_SCENARIO_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
};

Scenario load(const char* name) { return load_scenario(scenario_dir / name); }

std::string fmt(double v, int precision = 3)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(precision);
    s << v;
    return s.str();
}

std::map<BeaconId, SimDuration> offsets_of(const RunResult& r, StationId sta)
{
    std::map<BeaconId, SimDuration> m;
    for (const auto& o : r.offsets)
        if (o.station == sta) m[o.beacon] = o.offset;
    return m;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 1. Every sampled estimate equals true time in noise-free single-cell and bridged runs.
Verdict zero_noise()
{
    const auto t0 = Clock::now();
    std::size_t samples = 0;
    std::size_t nonzero = 0;
    for (const char* name : {"zero_noise_single_ap.toml", "zero_noise_bridged.toml"}) {
        const RunResult r = run_scenario(load(name));
        samples += r.errors.size();
        nonzero += static_cast<std::size_t>(
            std::count_if(r.errors.begin(), r.errors.end(), [](const ErrorSample& e) { return e.error.ns != 0; }));
    }
    const double elapsed = seconds_since(t0);
    return {samples > 0 && nonzero == 0 && elapsed < 1.0,
            std::to_string(samples) + " samples, " + std::to_string(nonzero) + " nonzero, " + fmt(elapsed) + " s"};
}

// 2. Adding contention before the beacon leaves every offset unchanged.
Verdict sender_delay_invariance()
{
    Scenario plain = load("zero_noise_single_ap.toml");
    plain.duration = time_units(100) * 10'000;
    plain.sample_interval = 1_s;
    Scenario contended = plain;
    contended.aps[0].access_delay = JitterSpec::uniform(SimDuration{}, 5_ms);

    const RunResult a = run_scenario(plain);
    const RunResult b = run_scenario(contended);
    std::size_t compared = 0;
    std::size_t differing = 0;
    bool complete = true;
    for (const auto& st : plain.stations) {
        if (st.id == plain.reference_station) continue;
        const auto oa = offsets_of(a, st.id);
        const auto ob = offsets_of(b, st.id);
        complete = complete && oa.size() >= 10'000 && ob.size() >= 10'000;
        for (const auto& [id, off] : oa) {
            const auto it = ob.find(id);
            if (it == ob.end()) continue;
            ++compared;
            if (it->second != off) ++differing;
        }
    }
    return {complete && differing == 0 && compared >= 20'000,
            std::to_string(compared) + " offsets compared over 2 stations, " + std::to_string(differing) + " differ"};
}

// 3. Entry count m(m-1)/2 and a fully reported matrix of that size.
Verdict entry_count()
{
    std::int64_t bad = 0;
    for (std::int64_t m = 1; m <= 1000; ++m) {
        std::uint64_t pairs = 0;
        for (std::int64_t i = 1; i < m; ++i) pairs += static_cast<std::uint64_t>(i);
        if (n_entries(m) != pairs) ++bad;
    }
    std::string sizes;
    for (std::uint32_t m : {1u, 2u, 3u, 10u, 100u, 1000u}) {
        std::vector<ApId> ids;
        for (std::uint32_t i = 1; i <= m; ++i) ids.push_back(ApId{i});
        OffsetMatrix db(ids);
        for (std::uint32_t i = 1; i <= m; ++i)
            for (std::uint32_t j = i + 1; j <= m; ++j)
                db.upsert({ApId{j}, ApId{i}, SimDuration{static_cast<std::int64_t>(i) - j}, SimTime{1}, StationId{1}});
        if (db.entry_count() != n_entries(m)) ++bad;
        sizes += (sizes.empty() ? "" : ",") + std::to_string(db.entry_count());
    }
    return {bad == 0, "m in [1,1000] checked, full matrices store " + sizes};
}

struct Calibrated {
    RunResult gptp;
    RunResult rbis;
    RunResult wifi;
    double seconds = 0;
};

const Calibrated& calibrated()
{
    static const Calibrated c = [] {
        Calibrated out;
        const auto t0 = Clock::now();
        out.gptp = run_scenario(load("calibrated_gptp_wired.toml"));
        out.rbis = run_scenario(load("calibrated_rbis.toml"));
        out.wifi = run_scenario(load("calibrated_ptp_wifi.toml"));
        out.seconds = seconds_since(t0);
        return out;
    }();
    return c;
}

std::string describe(const char* name, const ErrorSummary& s)
{
    return std::string(name) + " median " + fmt(s.median, 0) + " ns max " + fmt(s.max, 0) + " ns";
}

// 4. Median ranges and strict ordering of medians and maxima.
Verdict ordering()
{
    const Calibrated& c = calibrated();
    const auto g = *c.gptp.summary();
    const auto r = *c.rbis.summary();
    const auto w = *c.wifi.summary();
    const auto wifi_errors = c.wifi.error_series();
    const auto over_1ms = std::count_if(wifi_errors.begin(), wifi_errors.end(),
                                        [](SimDuration e) { return abs(e) > 1_ms; });
    const auto needed = static_cast<std::int64_t>((wifi_errors.size() + 999) / 1000);

    const bool ranges = g.median >= 10 && g.median <= 500 && r.median >= 1e3 && r.median <= 100e3 &&
                        w.median >= 0.3e6 && w.median <= 3e6;
    const bool order = g.median < r.median && r.median < w.median && g.max < r.max && r.max < w.max;
    return {ranges && order && over_1ms >= needed && c.seconds < 30.0,
            describe("gptp", g) + "; " + describe("rbis", r) + "; " + describe("ptp_wifi", w) + "; " +
                std::to_string(over_1ms) + "/" + std::to_string(wifi_errors.size()) + " ptp_wifi samples > 1 ms; " +
                fmt(c.seconds, 1) + " s"};
}

// 5. Class verdicts on the maximum error.
Verdict class_verdicts()
{
    const Calibrated& c = calibrated();
    const bool rbis_ii = classify(*c.rbis.summary(), UseCaseClass::II, Criterion::max);
    const bool wifi_ii = classify(*c.wifi.summary(), UseCaseClass::II, Criterion::max);
    const bool gptp_iii = classify(*c.gptp.summary(), UseCaseClass::III, Criterion::max);
    const auto word = [](bool p) { return p ? "pass" : "fail"; };
    return {rbis_ii && !wifi_ii && gptp_iii, std::string("rbis II ") + word(rbis_ii) + ", ptp_wifi II " + word(wifi_ii) +
                                                 ", gptp_wired III " + word(gptp_iii)};
}

// 6. Carriage offset equals v_max times skew in cruise; seeded demonstrator runs.
Verdict demonstrator()
{
    const MotionProfile profile{0.0, 2.0, 4.0, 30.0};
    const SimTime t = SimTime{} + 1_s;
    const DemoOutcome one_ms = evaluate_carriages({profile, t}, {profile, t + 1_ms}, 100_us);
    const bool cruise = std::abs(one_ms.delta_s_max - 4e-3) <= 1e-6;

    bool proportional = true;
    for (std::int64_t skew_us : {3, 10, 250, 700, 2'000}) {
        const DemoOutcome o = evaluate_carriages({profile, t}, {profile, t + 1_us * skew_us}, 100_us);
        proportional = proportional && std::abs(o.delta_s_max - 4.0 * static_cast<double>(skew_us) * 1e-6) <= 1e-6;
    }

    const auto count_over = [](const char* name, double& worst) {
        const Scenario base = load(name);
        int over = 0;
        for (std::uint64_t k = 0; k < 100; ++k) {
            Scenario sc = base;
            sc.seed = base.seed + k;
            // Nothing after the move matters for the demonstrator.
            sc.duration = (sc.demonstrator->trigger_at - SimTime{}) + 2_s;
            const RunResult r = run_scenario(sc);
            worst = std::max(worst, r.demo->outcome.delta_s_max);
            if (r.demo->outcome.delta_s_max >= demonstrator_limit_m) ++over;
        }
        return over;
    };
    double rbis_worst = 0;
    double wifi_worst = 0;
    const int rbis_over = count_over("calibrated_rbis.toml", rbis_worst);
    const int wifi_over = count_over("calibrated_ptp_wifi.toml", wifi_worst);

    return {cruise && proportional && rbis_over == 0 && wifi_over >= 1,
            "1 ms skew -> " + fmt(one_ms.delta_s_max * 1e3, 4) + " mm; rbis " + std::to_string(100 - rbis_over) +
                "/100 under 4 mm (worst " + fmt(rbis_worst * 1e3) + " mm); ptp_wifi " + std::to_string(wifi_over) +
                "/100 over 4 mm (worst " + fmt(wifi_worst * 1e3) + " mm)"};
}

// 7. Error budget: |error| <= 2J + |drift| age + 1 us + granularity and timestamp terms.
Verdict error_budget()
{
    RngState rng(derive_stream_seed(20240507, "acceptance/error_budget"));
    const Bssid bssid = Bssid::parse("02:00:00:00:00:01");
    std::int64_t violations = 0;
    double tightest = 0;
    const int trials = 100'000;
    for (int k = 0; k < trials; ++k) {
        const SimDuration j_half{rng.uniform_int(0, 50'000)};
        const auto drift = Drift{rng.uniform_int(-100'000'000, 100'000'000)};
        const SimDuration g_ref{rng.uniform_int(1, 16)};
        const SimDuration g_sta{rng.uniform_int(1, 1'000)};
        const SimDuration ref_sigma{rng.uniform_int(0, 100)};
        const ClockModel ref(SimDuration{}, Drift{}, g_ref, JitterSpec::normal(SimDuration{}, ref_sigma));
        const ClockModel sta(SimDuration{rng.uniform_int(-10'000'000'000, 10'000'000'000)}, drift, g_sta,
                             JitterSpec::none());
        const JitterSpec rx_jitter = JitterSpec::uniform(-j_half, j_half);

        // Beacon leaves the AP after contention; both receivers stamp it.
        const SimTime tx{rng.uniform_int(0, 100'000'000'000'000)};
        const SimDuration access{rng.uniform_int(0, 5'000'000)};
        const SimDuration prop_ref{rng.uniform_int(0, 1'000)};
        const SimDuration prop_sta{rng.uniform_int(0, 1'000)};
        const SimTime rx_ref = tx + access + prop_ref + jitter_sample(rx_jitter, rng);
        const SimTime rx_sta = tx + access + prop_sta + jitter_sample(rx_jitter, rng);

        ReferenceState reference;
        StationSyncState station(bssid);
        const BeaconFrame f{bssid, static_cast<std::uint64_t>(k + 1), 100, "x"};
        station.on_beacon(f, clock_read(sta, rx_sta, rng));
        station.on_correction(reference.on_beacon(f, clock_read(ref, rx_ref, rng)));

        const SimDuration age{rng.uniform_int(0, 2'000'000'000)};
        const SimTime now = rx_sta + age;
        const SimDuration error = estimate_tsn_time(station, clock_read(sta, now, rng), SimDuration{}) - now;

        const double bound = 2.0 * static_cast<double>(j_half.ns) +
                             std::abs(static_cast<double>(drift.ppt)) * 1e-12 * static_cast<double>(age.ns) + 1'000.0 +
                             static_cast<double>(g_ref.ns + 2 * g_sta.ns) + 4.0 * static_cast<double>(ref_sigma.ns) + 1.0;
        const double mag = std::abs(static_cast<double>(error.ns));
        if (mag > bound) ++violations;
        tightest = std::max(tightest, mag / bound);
    }
    return {violations == 0, std::to_string(trials) + " trials, " + std::to_string(violations) +
                                 " violations, largest error/bound " + fmt(tightest)};
}

// 8. Golden frame, randomized round trips and offline replay equivalence.
Verdict codec()
{
    const std::vector<std::uint8_t> golden{0x80, 0x00, 0x00, 0x00, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0x02, 0x11, 0x22,
                                           0x33, 0x44, 0x55, 0x02, 0x11, 0x22, 0x33, 0x44, 0x55, 0x00, 0x00, 0x08, 0x07,
                                           0x06, 0x05, 0x04, 0x03, 0x02, 0x01, 0x64, 0x00, 0x01, 0x00, 0x00, 0x02, 'A',
                                           'P'};
    const BeaconFrame golden_frame{Bssid::parse("02:11:22:33:44:55"), 0x0102030405060708ULL, 100, "AP"};
    const bool golden_ok = encode_beacon(golden_frame) == golden && decode_beacon(golden) == golden_frame;

    RngState rng(derive_stream_seed(20240508, "acceptance/codec"));
    int round_trip_failures = 0;
    for (int i = 0; i < 10'000; ++i) {
        BeaconFrame f;
        for (auto& o : f.bssid.octets) o = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        f.tsf_timestamp = rng.next_u64();
        f.beacon_interval_tu = static_cast<std::uint16_t>(rng.uniform_int(1, 65535));
        const auto len = rng.uniform_int(0, 32);
        for (std::int64_t c = 0; c < len; ++c) f.ssid.push_back(static_cast<char>(rng.uniform_int(0, 255)));
        if (decode_beacon(encode_beacon(f)) != f) ++round_trip_failures;
    }

    std::size_t compared = 0;
    std::size_t mismatched = 0;
    const auto dir = std::filesystem::temp_directory_path() / "rbissim_acceptance_replay";
    for (const char* name : {"calibrated_rbis.toml", "zero_noise_bridged.toml"}) {
        const Scenario sc = load(name);
        const RunResult r = run_scenario(sc);
        std::filesystem::remove_all(dir);
        write_outputs(r, dir);
        const auto ref = read_replay_file(dir / ("beacons_" + to_string(sc.reference_station) + ".bin"));
        for (const auto& st : sc.stations) {
            if (st.id == sc.reference_station) continue;
            const auto sta = read_replay_file(dir / ("beacons_" + to_string(st.id) + ".bin"));
            std::map<BeaconId, SimDuration> offline;
            try {
                for (const auto& o : analyze_replay(ref, sta).offsets) offline[o.beacon] = o.offset;
            }
            catch (const ReplayError&) {
            }
            // Replay pairs only beacons the reference heard; a bridge station's
            // offsets for other APs come from their own reporters.
            const Bssid shared = sc.ap(sc.station(sc.reference_station).associated).bssid;
            for (const auto& [id, off] : offsets_of(r, st.id)) {
                if (id.bssid != shared) continue;
                ++compared;
                const auto it = offline.find(id);
                if (it == offline.end() || it->second != off) ++mismatched;
            }
        }
    }
    std::filesystem::remove_all(dir);
    return {golden_ok && round_trip_failures == 0 && mismatched == 0 && compared > 0,
            std::string("golden ") + (golden_ok ? "ok" : "mismatch") + ", 10000 round trips with " +
                std::to_string(round_trip_failures) + " failures, " + std::to_string(compared) +
                " online offsets vs replay with " + std::to_string(mismatched) + " mismatches"};
}

// 9. Two executions of every shipped scenario produce identical trace and report bytes.
Verdict determinism()
{
    const auto base = std::filesystem::temp_directory_path() / "rbissim_acceptance_determinism";
    int scenarios = 0;
    std::vector<std::string> differing;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(scenario_dir))
        if (e.path().extension() == ".toml") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        ++scenarios;
        for (const char* run : {"a", "b"}) {
            std::filesystem::remove_all(base / run);
            write_outputs(run_scenario(load_scenario(path)), base / run);
        }
        for (const char* f : {"trace.log", "report.json"})
            if (slurp(base / "a" / f) != slurp(base / "b" / f)) differing.push_back(path.stem().string() + "/" + f);
        if (slurp(base / "a" / "trace.log").empty()) differing.push_back(path.stem().string() + " (empty trace)");
    }
    std::filesystem::remove_all(base);
    std::string detail = std::to_string(scenarios) + " scenarios run twice";
    for (const auto& d : differing) detail += ", differs: " + d;
    return {scenarios == 6 && differing.empty(), detail};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"1 zero-noise exactness", zero_noise},
        {"2 sender-delay invariance", sender_delay_invariance},
        {"3 offset matrix entry count", entry_count},
        {"4 method ordering", ordering},
        {"5 class verdicts", class_verdicts},
        {"6 demonstrator limit", demonstrator},
        {"7 error budget", error_budget},
        {"8 codec and replay", codec},
        {"9 determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        }
        catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
