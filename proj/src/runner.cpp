#include "rbissim/runner.hpp"

#include "rbissim/baselines.hpp"
#include "rbissim/netsim.hpp"
#include "rbissim/rbis.hpp"
#include "rbissim/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace rbissim {

namespace {

constexpr std::uint32_t tag_sample = 1;
constexpr std::uint32_t tag_handover = 2;
constexpr std::uint32_t tag_db_publish = 3;
constexpr std::uint32_t tag_demo_arm = 4;

std::string clock_stream(StationId s) { return to_string(s) + "/clock"; }

class ScenarioRun final : public EventHandler {
public:
    explicit ScenarioRun(const Scenario& sc)
        : sc_(sc), topology_(sc.topology()), engine_(sc.seed), db_(ap_ids(sc))
    {
        if (auto problems = sc.violations(); !problems.empty()) throw ScenarioError(sc.name, std::move(problems));
        if (sc.stations.size() > 0) covered_ = sc.station(sc.reference_station).in_range;
        for (const auto& a : sc.aps)
            aps_.emplace(a.id, ApRuntime{ApState{a.bssid, a.ssid, a.tsf_epoch, a.tsf_clock, a.beacon_interval_tu}, {}});
        for (const auto& s : sc.stations) {
            const Bssid assoc = sc.ap(s.associated).bssid;
            stations_.emplace(s.id, StationRuntime{&s, StationSyncState(assoc, sc.ring_capacity), {}, std::nullopt, false});
        }
        const double seconds = static_cast<double>(sc.duration.ns) * 1e-9;
        plan_ = plan_publishing(static_cast<std::int64_t>(sc.aps.size()),
                                static_cast<double>(sc.handovers.size()) / seconds, sc.offsetdb.channel_busy,
                                sc.offsetdb.policy);
    }

    RunResult run()
    {
        const SimTime end = SimTime{} + sc_.duration;
        if (sc_.method == Method::rbis) {
            for (const auto& a : sc_.aps) engine_.schedule(std::max(SimTime{}, a.tsf_epoch), BeaconTx{a.id});
            for (const auto& s : sc_.stations) {
                if (s.id == sc_.reference_station) continue;
                engine_.schedule(SimTime{} + sc_.sample_interval, TimerExpiry{NodeId::of(s.id), tag_sample, 0});
            }
            if (plan_.mode == PublishPlan::Mode::cyclic && uses_database())
                engine_.schedule(SimTime{} + plan_.period, TimerExpiry{NodeId::database(), tag_db_publish, 0});
        }
        else {
            start_ptp();
        }
        for (std::size_t k = 0; k < sc_.handovers.size(); ++k)
            engine_.schedule(sc_.handovers[k].at, TimerExpiry{NodeId::of(sc_.handovers[k].station), tag_handover,
                                                              static_cast<std::uint32_t>(k)});
        if (sc_.demonstrator)
            engine_.schedule(sc_.demonstrator->trigger_at - sc_.demonstrator->arm_lead,
                             TimerExpiry{NodeId::carriage(0), tag_demo_arm, 0});

        engine_.run_until(end, *this);

        if (sc_.demonstrator && !result_.demo)
            throw std::runtime_error("demonstrator did not complete before the end of the run");

        result_.scenario = sc_;
        result_.trace = engine_.trace();
        for (const auto& [id, rt] : stations_) result_.replays[id] = rt.replay;
        result_.offset_db = db_;
        result_.publish_plan = plan_;
        return std::move(result_);
    }

    void handle(Engine& engine, const Event& event) override
    {
        if (ptp_ && ptp_->handle(engine, event)) {
            if (const auto* d = std::get_if<FrameDelivery>(&event.payload);
                d && std::holds_alternative<PtpMessage>(d->frame) && d->to == NodeId::grandmaster())
                collect_ptp_error(StationId{d->from.index});
            return;
        }
        std::visit([&](const auto& p) { on(p); }, event.payload);
    }

private:
    struct ApRuntime {
        ApState state;
        std::optional<std::uint64_t> last_tsf;
    };

    struct StationRuntime {
        const StationConfig* cfg;
        StationSyncState sync;
        /// delta(j, via) keyed by (j, via), from replies or published snapshots.
        std::map<std::pair<ApId, ApId>, SimDuration> dt_cache;
        std::optional<OffsetMatrix> snapshot;
        bool query_outstanding;
        std::vector<ReplayRecord> replay{};
    };

    static std::vector<ApId> ap_ids(const Scenario& sc)
    {
        std::vector<ApId> ids;
        for (const auto& a : sc.aps) ids.push_back(a.id);
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    bool uses_database() const
    {
        return std::any_of(sc_.stations.begin(), sc_.stations.end(), [](const auto& s) { return !s.bridges.empty(); });
    }

    bool is_reference(StationId s) const { return s == sc_.reference_station; }

    std::vector<StationId> subscribers() const
    {
        std::vector<StationId> out;
        for (const auto& [id, rt] : stations_)
            if (!is_reference(id)) out.push_back(id);
        return out;
    }

    ApId ap_of(const Bssid& b) const
    {
        for (const auto& a : sc_.aps)
            if (a.bssid == b) return a.id;
        throw std::logic_error("frame from unknown BSSID " + b.to_string());
    }

    // -- beacons ------------------------------------------------------------

    void on(const BeaconTx& tx)
    {
        ApRuntime& ap = aps_.at(tx.ap);
        const BeaconFrame frame = make_beacon(ap.state, engine_.now(), engine_.stream(to_string(tx.ap) + "/tsf"));
        if (ap.last_tsf && frame.tsf_timestamp <= *ap.last_tsf)
            throw std::logic_error("TSF of " + to_string(tx.ap) + " did not advance");
        ap.last_tsf = frame.tsf_timestamp;
        engine_.trace().append(engine_.now(), trace_kind::beacon_tx, to_string(tx.ap),
                               {kv("bssid", frame.bssid.to_string()), kv("tsf", static_cast<std::int64_t>(frame.tsf_timestamp))});
        broadcast(engine_, topology_, tx.ap, frame, engine_.now());
        engine_.schedule(engine_.now() + time_units(ap.state.beacon_interval_tu), BeaconTx{tx.ap});
    }

    void on_beacon(StationRuntime& rt, const BeaconFrame& frame)
    {
        const StationId id = rt.cfg->id;
        const SimTime local_rx = clock_read(rt.cfg->clock, engine_.now(), engine_.stream(clock_stream(id)));
        rt.replay.push_back({local_rx, frame});
        engine_.trace().append(engine_.now(), trace_kind::beacon_rx, to_string(id),
                               {kv("bssid", frame.bssid.to_string()),
                                kv("tsf", static_cast<std::int64_t>(frame.tsf_timestamp)), kv("local_rx", local_rx.ns)});

        if (is_reference(id)) {
            const CorrectionRecord rec = reference_.on_beacon(frame, local_rx);
            engine_.trace().append(engine_.now(), trace_kind::correction_tx, to_string(id),
                                   {kv("bssid", rec.bssid.to_string()),
                                    kv("tsf", static_cast<std::int64_t>(rec.beacon_tsf)), kv("tsn_rx", rec.tsn_rx_time.ns)});
            disseminate(id, rec);
            return;
        }

        record_match(id, rt.sync.on_beacon(frame, local_rx));

        const ApId heard = ap_of(frame.bssid);
        for (const auto& [i, j] : rt.cfg->bridges) {
            if (j != heard) continue;
            BridgeResult bridge;
            try {
                bridge = bridge_compute_ap_offset(rt.sync, {i, sc_.ap(i).bssid}, {j, sc_.ap(j).bssid}, id, engine_.now());
            }
            catch (const NotABridgeError&) {
                continue;
            }
            engine_.trace().append(engine_.now(), trace_kind::bridge_publish, to_string(id),
                                   {kv("ap_i", std::int64_t{i.value}), kv("ap_j", std::int64_t{j.value}),
                                    kv("delta_ns", bridge.offset.delta.ns),
                                    kv("tsf", static_cast<std::int64_t>(bridge.derived.beacon_tsf)),
                                    kv("tsn_rx", bridge.derived.tsn_rx_time.ns)});
            disseminate(id, bridge.derived);
            engine_.schedule(engine_.now() + sc_.offsetdb.latency,
                             FrameDelivery{NodeId::database(), NodeId::of(id), bridge.offset});
        }
    }

    void disseminate(StationId from, const CorrectionRecord& rec)
    {
        const auto& d = sc_.dissemination;
        RngState& rng = engine_.stream(to_string(from) + "/dissemination");
        const auto targets = subscribers();
        const SimDuration shared = jitter_sample(d.jitter, rng);
        for (StationId to : targets) {
            const SimDuration jitter = d.mode == DisseminationMode::broadcast ? shared : jitter_sample(d.jitter, rng);
            engine_.schedule(engine_.now() + d.latency + jitter, FrameDelivery{NodeId::of(to), NodeId::of(from), rec});
        }
    }

    void record_match(StationId id, const std::optional<MatchedPair>& pair)
    {
        if (!pair) return;
        const SimDuration off = pair->offset();
        result_.offsets.push_back({engine_.now(), id, pair->tuple.id(), off});
        engine_.trace().append(engine_.now(), trace_kind::offset, to_string(id),
                               {kv("bssid", pair->tuple.bssid.to_string()),
                                kv("tsf", static_cast<std::int64_t>(pair->tuple.beacon_tsf)), kv("offset_ns", off.ns)});
    }

    // -- deliveries ---------------------------------------------------------

    void on(const FrameDelivery& d)
    {
        if (d.to == NodeId::database()) return on_database(d);
        if (d.to.kind != NodeId::Kind::station) throw std::logic_error("delivery to " + to_string(d.to));
        StationRuntime& rt = stations_.at(StationId{d.to.index});
        std::visit(
            [&](const auto& f) {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, BeaconFrame>) {
                    on_beacon(rt, f);
                }
                else if constexpr (std::is_same_v<F, CorrectionRecord>) {
                    if (is_reference(rt.cfg->id)) return;
                    engine_.trace().append(engine_.now(), trace_kind::correction_rx, to_string(rt.cfg->id),
                                           {kv("bssid", f.bssid.to_string()),
                                            kv("tsf", static_cast<std::int64_t>(f.beacon_tsf)), kv("tsn_rx", f.tsn_rx_time.ns)});
                    record_match(rt.cfg->id, rt.sync.on_correction(f));
                }
                else if constexpr (std::is_same_v<F, OffsetMatrix>) {
                    rt.snapshot = f;
                }
                else if constexpr (std::is_same_v<F, OffsetReply>) {
                    rt.query_outstanding = false;
                    if (f.delta) rt.dt_cache[{f.from, f.to}] = *f.delta;
                }
                else {
                    throw std::logic_error(std::string("unexpected ") + std::string(frame_kind(Frame{f})) + " at station");
                }
            },
            d.frame);
    }

    void on_database(const FrameDelivery& d)
    {
        if (const auto* off = std::get_if<ApPairOffset>(&d.frame)) {
            if (db_.upsert(*off))
                engine_.trace().append(engine_.now(), trace_kind::db_update, "db",
                                       {kv("ap_i", std::int64_t{off->ap_i.value}), kv("ap_j", std::int64_t{off->ap_j.value}),
                                        kv("delta_ns", off->delta.ns), kv("reporter", to_string(off->reporter))});
            return;
        }
        if (const auto* q = std::get_if<OffsetQuery>(&d.frame)) {
            engine_.schedule(engine_.now() + sc_.offsetdb.latency,
                             FrameDelivery{NodeId::of(q->station), NodeId::database(), OffsetReply{q->from, q->to, db_.query(q->from, q->to)}});
            return;
        }
        throw std::logic_error("unexpected " + std::string(frame_kind(d.frame)) + " at the database");
    }

    // -- timers -------------------------------------------------------------

    void on(const TimerExpiry& t)
    {
        switch (t.tag) {
        case tag_sample: return sample(StationId{t.node.index});
        case tag_handover: return apply_handover(sc_.handovers.at(t.arg));
        case tag_db_publish: return publish_db();
        case tag_demo_arm: return arm_demonstrator();
        default: throw std::logic_error("unknown timer tag " + std::to_string(t.tag));
        }
    }

    void sample(StationId id)
    {
        StationRuntime& rt = stations_.at(id);
        const SimTime local_now = clock_read(rt.cfg->clock, engine_.now(), engine_.stream(clock_stream(id)));
        if (const auto est = estimate(rt, local_now)) {
            const SimDuration error = *est - engine_.now();
            result_.errors.push_back({engine_.now(), id, error});
            engine_.trace().append(engine_.now(), trace_kind::sync_error, to_string(id), {kv("error_ns", error.ns)});
        }
        else {
            ++result_.unsynchronized_samples;
            engine_.trace().append(engine_.now(), trace_kind::unsynchronized, to_string(id));
        }
        const SimTime next = engine_.now() + sc_.sample_interval;
        if (next.ns <= sc_.duration.ns) engine_.schedule(next, TimerExpiry{NodeId::of(id), tag_sample, 0});
    }

    /// TSN time at `local_now` for an RBIS station, if it can tell.
    std::optional<SimTime> estimate(StationRuntime& rt, SimTime local_now)
    {
        const ApId assoc = ap_of(rt.sync.associated());
        try {
            if (covered_.contains(assoc) || sc_.cross_ap_route == CrossApRoute::derived)
                return estimate_tsn_time(rt.sync, local_now, SimDuration{});

            for (ApId via : covered_) {
                if (!rt.sync.latest_correction(sc_.ap(via).bssid)) continue;
                const auto dt = lookup_dt(rt, assoc, via);
                if (!dt) return std::nullopt;
                return estimate_tsn_time_via(rt.sync, sc_.ap(via).bssid, local_now, *dt);
            }
        }
        catch (const UnsynchronizedError&) {
        }
        return std::nullopt;
    }

    std::optional<SimDuration> lookup_dt(StationRuntime& rt, ApId j, ApId via)
    {
        if (plan_.mode == PublishPlan::Mode::cyclic) return rt.snapshot ? rt.snapshot->query(j, via) : std::nullopt;
        if (const auto it = rt.dt_cache.find({j, via}); it != rt.dt_cache.end()) return it->second;
        request_dt(rt, j, via);
        return std::nullopt;
    }

    void request_dt(StationRuntime& rt, ApId j, ApId via)
    {
        if (rt.query_outstanding) return;
        rt.query_outstanding = true;
        engine_.trace().append(engine_.now(), trace_kind::offset_query, to_string(rt.cfg->id),
                               {kv("ap_j", std::int64_t{j.value}), kv("via", std::int64_t{via.value})});
        engine_.schedule(engine_.now() + sc_.offsetdb.latency,
                         FrameDelivery{NodeId::database(), NodeId::of(rt.cfg->id), OffsetQuery{rt.cfg->id, j, via}});
    }

    void apply_handover(const HandoverStep& step)
    {
        topology_ = handover(std::move(topology_), step.station, step.to_ap);
        StationRuntime& rt = stations_.at(step.station);
        rt.sync.set_associated(sc_.ap(step.to_ap).bssid);
        engine_.trace().append(engine_.now(), trace_kind::handover, to_string(step.station),
                               {kv("to_ap", std::int64_t{step.to_ap.value})});
        if (sc_.method != Method::rbis || covered_.contains(step.to_ap)) return;
        if (sc_.cross_ap_route != CrossApRoute::offset_matrix || plan_.mode != PublishPlan::Mode::on_request) return;
        if (!covered_.empty()) {
            rt.dt_cache.clear();
            request_dt(rt, step.to_ap, *covered_.begin());
        }
    }

    void publish_db()
    {
        for (StationId to : subscribers())
            engine_.schedule(engine_.now() + sc_.offsetdb.latency, FrameDelivery{NodeId::of(to), NodeId::database(), db_});
        engine_.trace().append(engine_.now(), trace_kind::db_publish, "db",
                               {kv("entries", static_cast<std::int64_t>(db_.entry_count()))});
        engine_.schedule(engine_.now() + plan_.period, TimerExpiry{NodeId::database(), tag_db_publish, 0});
    }

    // -- baselines ----------------------------------------------------------

    void start_ptp()
    {
        ptp_.emplace(sc_.ptp.master_clock, sc_.ptp.sync_interval, sc_.ptp.turnaround);
        for (const auto& s : sc_.stations) {
            if (is_reference(s.id)) continue;
            PathModel forward;
            PathModel backward;
            if (sc_.method == Method::gptp_wired) {
                forward.delay = sc_.ptp.wired_delay + sc_.ptp.wired_asymmetry;
                backward.delay = sc_.ptp.wired_delay;
            }
            else {
                const WirelessLinkModel& link = topology_.link(s.associated, s.id);
                forward = {sc_.ptp.wired_delay + sc_.ptp.wired_asymmetry + link.propagation_delay,
                           sc_.ap(s.associated).access_delay, link.receiver_jitter};
                backward = {link.propagation_delay + sc_.ptp.wired_delay, s.uplink_access_delay, link.receiver_jitter};
            }
            ptp_->add_slave(s.id, s.clock, forward, backward);
        }
        ptp_->start(engine_, SimTime{});
    }

    void collect_ptp_error(StationId id)
    {
        const auto& errors = ptp_->errors(id);
        if (errors.size() > ptp_seen_[id]) {
            result_.errors.push_back({engine_.now(), id, errors.back()});
            ptp_seen_[id] = errors.size();
        }
    }

    // -- demonstrator -------------------------------------------------------

    /// est(local) - local for the station's current synchronization state.
    SimDuration clock_correction(StationId id)
    {
        if (is_reference(id)) return {};
        if (ptp_) {
            const auto theta = ptp_->offset_estimate(id);
            if (!theta) throw std::runtime_error("demonstrator station " + to_string(id) + " has no PTP estimate yet");
            return SimDuration{} - *theta;
        }
        StationRuntime& rt = stations_.at(id);
        const SimTime local_now = clock_read(rt.cfg->clock, engine_.now(), engine_.stream(clock_stream(id)));
        const auto est = estimate(rt, local_now);
        if (!est) throw std::runtime_error("demonstrator station " + to_string(id) + " is unsynchronized when arming");
        return *est - local_now;
    }

    void arm_demonstrator()
    {
        const auto& d = *sc_.demonstrator;
        const std::array<StationId, 2> drivers{d.station_a, d.station_b};
        for (std::uint32_t k = 1; k <= 2; ++k) {
            const StationId id = drivers[k - 1];
            const SimTime local_target = d.trigger_at - clock_correction(id);
            SimTime at = sc_.station(id).clock.true_time_of(local_target);
            at += jitter_sample(d.gpio_latency, engine_.stream(to_string(NodeId::carriage(k)) + "/gpio"));
            engine_.schedule(std::max(at, engine_.now()), MotionTrigger{k});
        }
    }

    void on(const MotionTrigger& m)
    {
        const auto& d = *sc_.demonstrator;
        engine_.trace().append(engine_.now(), trace_kind::motion_trigger, to_string(NodeId::carriage(m.carriage)));
        (m.carriage == 1 ? trigger1_ : trigger2_) = engine_.now();
        if (!trigger1_ || !trigger2_) return;
        const CarriageRun run1{d.profile, *trigger1_};
        const CarriageRun run2{d.profile, *trigger2_};
        const DemoOutcome outcome = evaluate_carriages(run1, run2, d.sample_period, d.sensor_noise ? &d.sensor : nullptr,
                                                       &engine_.stream("demo/sensor"));
        result_.demo = DemoResult{*trigger1_, *trigger2_, outcome};
    }

    const Scenario& sc_;
    Topology topology_;
    Engine engine_;
    std::set<ApId> covered_;
    std::map<ApId, ApRuntime> aps_;
    std::map<StationId, StationRuntime> stations_;
    ReferenceState reference_;
    OffsetMatrix db_;
    PublishPlan plan_;
    std::optional<PtpSession> ptp_;
    std::map<StationId, std::size_t> ptp_seen_;
    std::optional<SimTime> trigger1_;
    std::optional<SimTime> trigger2_;
    RunResult result_;
};

nlohmann::ordered_json summary_json(const std::optional<ErrorSummary>& s)
{
    if (!s) return nullptr;
    return {{"n", s->n},       {"min_ns", s->min}, {"q1_ns", s->q1},   {"median_ns", s->median},
            {"q3_ns", s->q3},  {"p99_ns", s->p99}, {"max_ns", s->max}};
}

std::string plan_mode(const PublishPlan& p) { return p.mode == PublishPlan::Mode::cyclic ? "cyclic" : "on_request"; }

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

std::vector<SimDuration> RunResult::error_series(std::optional<StationId> station) const
{
    std::vector<SimDuration> out;
    for (const auto& e : errors)
        if (!station || e.station == *station) out.push_back(e.error);
    return out;
}

std::optional<ErrorSummary> RunResult::summary() const
{
    const auto series = error_series();
    if (series.empty()) return std::nullopt;
    return summarize(std::span<const SimDuration>(series));
}

RunResult run_scenario(const Scenario& scenario) { return ScenarioRun(scenario).run(); }

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string report_json(const RunResult& r)
{
    using nlohmann::ordered_json;
    const auto summary = r.summary();

    ordered_json doc;
    doc["scenario"] = r.scenario.name;
    doc["scenario_hash"] = scenario_hash(r.scenario);
    doc["seed"] = r.scenario.seed;
    doc["method"] = std::string(to_string(r.scenario.method));
    doc["duration_ns"] = r.scenario.duration.ns;
    doc["methods"] = ordered_json::object({{std::string(to_string(r.scenario.method)), summary_json(summary)}});

    ordered_json per_station = ordered_json::object();
    std::set<StationId> ids;
    for (const auto& e : r.errors) ids.insert(e.station);
    for (StationId id : ids) {
        const auto series = r.error_series(id);
        per_station[to_string(id)] = summary_json(summarize(std::span<const SimDuration>(series)));
    }
    doc["stations"] = per_station;
    doc["unsynchronized_samples"] = r.unsynchronized_samples;

    ordered_json verdicts = ordered_json::object();
    ordered_json notes = ordered_json::array();
    for (auto c : {UseCaseClass::I, UseCaseClass::II, UseCaseClass::III}) {
        const std::string name(to_string(c));
        if (!summary) {
            verdicts[name] = nullptr;
            continue;
        }
        const bool med = classify(*summary, c, Criterion::median);
        const bool max = classify(*summary, c, Criterion::max);
        verdicts[name] = {{"limit_ns", use_case(c).sync_limit.ns}, {"median", med}, {"max", max}};
        if (med && !max)
            notes.push_back("class " + name + ": median is within the limit but the maximum of " +
                            format_double(summary->max) + " ns is not");
    }
    doc["verdicts"] = verdicts;
    notes.push_back("verdicts apply the class limits literally: I 1 s, II 1 ms, III 1 us");
    doc["notes"] = notes;

    doc["offsetdb"] = {{"mode", plan_mode(r.publish_plan)},
                       {"period_ns", r.publish_plan.period.ns},
                       {"payload_entries", r.publish_plan.payload_entries},
                       {"stored_entries", r.offset_db.entry_count()}};

    if (r.demo) {
        const auto& o = r.demo->outcome;
        doc["demonstrator"] = {{"trigger1_ns", r.demo->trigger1.ns},
                               {"trigger2_ns", r.demo->trigger2.ns},
                               {"trigger_skew_ns", o.trigger_skew.ns},
                               {"delta_s_max_m", o.delta_s_max},
                               {"inferred_time_offset_s", o.inferred_time_offset},
                               {"limit_m", demonstrator_limit_m},
                               {"within_limit", o.delta_s_max < demonstrator_limit_m}};
    }
    return doc.dump(2) + "\n";
}

std::string report_csv(const RunResult& r)
{
    std::ostringstream out;
    out << "scope,n,min_ns,q1_ns,median_ns,q3_ns,p99_ns,max_ns\n";
    auto row = [&](const std::string& scope, const ErrorSummary& s) {
        out << scope << ',' << s.n << ',' << format_double(s.min) << ',' << format_double(s.q1) << ','
            << format_double(s.median) << ',' << format_double(s.q3) << ',' << format_double(s.p99) << ','
            << format_double(s.max) << '\n';
    };
    if (const auto s = r.summary()) row(std::string(to_string(r.scenario.method)), *s);
    std::set<StationId> ids;
    for (const auto& e : r.errors) ids.insert(e.station);
    for (StationId id : ids) {
        const auto series = r.error_series(id);
        row(to_string(id), summarize(std::span<const SimDuration>(series)));
    }
    return out.str();
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir, ReportFormat format)
{
    std::filesystem::create_directories(dir);
    r.trace.write_file(dir / "trace.log");
    if (format == ReportFormat::json)
        write_text(dir / "report.json", report_json(r));
    else
        write_text(dir / "report.csv", report_csv(r));

    std::ostringstream series;
    series << "t_ns,node,error_ns\n";
    for (const auto& e : r.errors) series << e.t.ns << ',' << to_string(e.station) << ',' << e.error.ns << '\n';
    write_text(dir / "series.csv", series.str());

    std::ostringstream offsets;
    offsets << "t_ns,node,bssid,tsf,offset_ns\n";
    for (const auto& o : r.offsets)
        offsets << o.t.ns << ',' << to_string(o.station) << ',' << o.beacon.bssid.to_string() << ',' << o.beacon.tsf
                << ',' << o.offset.ns << '\n';
    write_text(dir / "offset_series.csv", offsets.str());

    std::ostringstream db;
    write_offsets_csv(db, r.offset_db);
    write_text(dir / "offsets.csv", db.str());

    for (const auto& [id, records] : r.replays) {
        if (!records.empty()) write_replay_file(dir / ("beacons_" + to_string(id) + ".bin"), records);
    }

    if (r.demo) {
        std::ostringstream pos;
        pos << "t_ns,s1_m,s2_m,delta_m\n";
        for (const auto& p : r.demo->outcome.series)
            pos << p.t.ns << ',' << format_double(p.s1) << ',' << format_double(p.s2) << ',' << format_double(p.delta)
                << '\n';
        write_text(dir / "positions.csv", pos.str());
    }
}

ReplayAnalysis analyze_replay(std::span<const ReplayRecord> reference, std::span<const ReplayRecord> station)
{
    std::map<BeaconId, SimTime> ref_rx;
    for (const auto& r : reference) {
        if (!ref_rx.emplace(identity_of(r.frame), r.rx_time).second)
            throw ReplayError("duplicate beacon " + r.frame.bssid.to_string() + "/" + std::to_string(r.frame.tsf_timestamp) +
                              " in reference file");
    }
    std::set<BeaconId> seen;
    ReplayAnalysis out;
    std::map<Bssid, SimDuration> previous;
    for (const auto& s : station) {
        const BeaconId id = identity_of(s.frame);
        if (!seen.insert(id).second)
            throw ReplayError("duplicate beacon " + id.bssid.to_string() + "/" + std::to_string(id.tsf) +
                              " in station file");
        const auto it = ref_rx.find(id);
        if (it == ref_rx.end()) continue;
        const SimDuration offset = it->second - s.rx_time;
        out.offsets.push_back({id, s.rx_time, it->second, offset});
        if (const auto prev = previous.find(id.bssid); prev != previous.end())
            out.prediction_errors.push_back((s.rx_time + prev->second) - it->second);
        previous[id.bssid] = offset;
    }
    if (out.offsets.empty()) throw ReplayError("the replay files share no beacon");
    if (!out.prediction_errors.empty()) out.summary = summarize(std::span<const SimDuration>(out.prediction_errors));
    return out;
}

std::uint64_t sweep_seed(std::uint64_t master, double value)
{
    return splitmix64(master ^ fnv1a64(format_double(value)));
}

std::vector<SweepPoint> sweep(std::string_view scenario_text, std::string_view parameter, std::span<const double> values,
                              std::optional<std::uint64_t> seed_override, std::string_view source)
{
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");

    // Parse every variant up front so configuration errors surface before any run.
    std::vector<Scenario> variants;
    for (double v : values) {
        Scenario sc = with_parameter(scenario_text, parameter, v, source);
        sc.seed = sweep_seed(seed_override.value_or(sc.seed), v);
        variants.push_back(std::move(sc));
    }

    std::vector<std::future<RunResult>> runs;
    for (const auto& sc : variants) runs.push_back(std::async(std::launch::async, [&sc] { return run_scenario(sc); }));

    std::vector<SweepPoint> points;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const RunResult r = runs[k].get();
        points.push_back({values[k], variants[k].seed, r.summary(), r.unsynchronized_samples});
    }
    return points;
}

std::string sweep_csv(std::string_view parameter, std::span<const SweepPoint> points)
{
    std::ostringstream out;
    out << "parameter,value,seed,n,min_ns,q1_ns,median_ns,q3_ns,p99_ns,max_ns,unsynchronized\n";
    for (const auto& p : points) {
        out << parameter << ',' << format_double(p.value) << ',' << p.seed << ',';
        if (p.summary) {
            const auto& s = *p.summary;
            out << s.n << ',' << format_double(s.min) << ',' << format_double(s.q1) << ',' << format_double(s.median)
                << ',' << format_double(s.q3) << ',' << format_double(s.p99) << ',' << format_double(s.max);
        }
        else {
            out << "0,,,,,,";
        }
        out << ',' << p.unsynchronized_samples << '\n';
    }
    return out.str();
}

} // namespace rbissim
