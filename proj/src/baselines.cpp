#include "rbissim/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace rbissim {

namespace {

const NodeId gm = NodeId::grandmaster();

std::string forward_access_stream(StationId s) { return "gm/ptp_access/" + to_string(s); }
std::string forward_jitter_stream(StationId s) { return to_string(s) + "/ptp_rxjitter"; }
std::string backward_access_stream(StationId s) { return to_string(s) + "/ptp_access"; }
std::string backward_jitter_stream(StationId s) { return "gm/ptp_rxjitter/" + to_string(s); }
std::string clock_stream(NodeId n) { return to_string(n) + "/clock"; }

SimTime arrival(Engine& engine, const PathModel& path, const std::string& access_key, const std::string& jitter_key)
{
    const SimDuration access = jitter_sample(path.access_delay, engine.stream(access_key));
    const SimDuration jitter = jitter_sample(path.receiver_jitter, engine.stream(jitter_key));
    return engine.now() + access + path.delay + jitter;
}

class SessionHandler : public EventHandler {
public:
    explicit SessionHandler(PtpSession& s) : session_(s) {}
    void handle(Engine& engine, const Event& event) override
    {
        if (!session_.handle(engine, event)) throw std::logic_error("unexpected event in PTP run");
    }

private:
    PtpSession& session_;
};

void check_path(const PathModel& p, const char* name)
{
    if (p.delay + p.receiver_jitter.support_min() < SimDuration{} || p.access_delay.support_min() < SimDuration{})
        throw std::invalid_argument(std::string(name) + " path can have negative delay");
}

PtpRunResult run_two_way(const PtpConfig& config)
{
    check_path(config.forward, "forward");
    check_path(config.backward, "backward");
    if (config.sync_interval.ns <= 0) throw std::invalid_argument("sync interval must be positive");

    const StationId slave{1};
    Engine engine(config.seed);
    PtpSession session(config.master_clock, config.sync_interval, config.turnaround);
    session.add_slave(slave, config.slave_clock, config.forward, config.backward);
    session.start(engine, SimTime{}, config.exchanges);

    SessionHandler handler(session);
    SimTime horizon = SimTime{} + config.sync_interval * static_cast<std::int64_t>(config.exchanges);
    engine.run_until(horizon, handler);
    while (engine.pending_events() > 0) {
        horizon += config.sync_interval;
        engine.run_until(horizon, handler);
    }
    return {session.errors(slave), engine.trace()};
}

} // namespace

SimDuration ptp_offset_estimate(const TwoWayExchange& x)
{
    const SimDuration forward = x.t2 - x.t1;
    const SimDuration backward = x.t4 - x.t3;
    return {floor_div((forward - backward).ns, 2)};
}

PtpRunResult run_gptp_wired(const PtpConfig& config)
{
    if (config.forward.access_delay.kind() != JitterSpec::Kind::none ||
        config.backward.access_delay.kind() != JitterSpec::Kind::none)
        throw std::invalid_argument("wired gPTP links have no medium access delay");
    return run_two_way(config);
}

PtpRunResult run_ptp_over_wifi(const PtpConfig& config) { return run_two_way(config); }

PtpSession::PtpSession(ClockModel master_clock, SimDuration sync_interval, SimDuration turnaround)
    : master_clock_(master_clock), interval_(sync_interval), turnaround_(turnaround)
{
}

void PtpSession::add_slave(StationId id, ClockModel clock, PathModel forward, PathModel backward)
{
    slaves_.push_back(Slave{id, clock, forward, backward, {}, 0, 0, std::nullopt, {}});
}

PtpSession::Slave& PtpSession::slave(StationId id)
{
    return const_cast<Slave&>(std::as_const(*this).slave(id));
}

const PtpSession::Slave& PtpSession::slave(StationId id) const
{
    const auto it = std::find_if(slaves_.begin(), slaves_.end(), [&](const Slave& s) { return s.id == id; });
    if (it == slaves_.end()) throw std::out_of_range("no PTP slave " + to_string(id));
    return *it;
}

void PtpSession::start(Engine& engine, SimTime first, std::uint32_t max_exchanges)
{
    max_exchanges_ = max_exchanges;
    for (const auto& s : slaves_) engine.schedule(first, TimerExpiry{gm, tag_sync, s.id.value});
}

void PtpSession::send_sync(Engine& engine, Slave& s)
{
    const std::uint32_t exchange = s.next_exchange++;
    TwoWayExchange& x = s.in_flight[exchange];
    x.t1 = clock_read(master_clock_, engine.now(), engine.stream(clock_stream(gm)));
    const SimTime at = arrival(engine, s.forward, forward_access_stream(s.id), forward_jitter_stream(s.id));
    engine.schedule(at, FrameDelivery{NodeId::of(s.id), gm, PtpMessage{PtpMessage::Type::sync, exchange}});
    if (s.next_exchange < max_exchanges_) engine.schedule(engine.now() + interval_, TimerExpiry{gm, tag_sync, s.id.value});
}

bool PtpSession::handle(Engine& engine, const Event& event)
{
    if (const auto* timer = std::get_if<TimerExpiry>(&event.payload)) {
        if (timer->tag == tag_sync && timer->node == gm) {
            send_sync(engine, slave(StationId{timer->arg}));
            return true;
        }
        if (timer->tag == tag_delay_req && timer->node.kind == NodeId::Kind::station) {
            Slave& s = slave(StationId{timer->node.index});
            TwoWayExchange& x = s.in_flight.at(timer->arg);
            x.t3 = clock_read(s.clock, engine.now(), engine.stream(clock_stream(NodeId::of(s.id))));
            const SimTime at = arrival(engine, s.backward, backward_access_stream(s.id), backward_jitter_stream(s.id));
            engine.schedule(at, FrameDelivery{gm, NodeId::of(s.id), PtpMessage{PtpMessage::Type::delay_req, timer->arg}});
            return true;
        }
        return false;
    }

    const auto* delivery = std::get_if<FrameDelivery>(&event.payload);
    if (!delivery) return false;
    const auto* msg = std::get_if<PtpMessage>(&delivery->frame);
    if (!msg) return false;

    if (msg->type == PtpMessage::Type::sync) {
        Slave& s = slave(StationId{delivery->to.index});
        TwoWayExchange& x = s.in_flight.at(msg->exchange);
        x.t2 = clock_read(s.clock, engine.now(), engine.stream(clock_stream(NodeId::of(s.id))));
        engine.schedule(engine.now() + turnaround_, TimerExpiry{NodeId::of(s.id), tag_delay_req, msg->exchange});
        return true;
    }

    Slave& s = slave(StationId{delivery->from.index});
    auto node = s.in_flight.extract(msg->exchange);
    if (node.empty()) throw std::logic_error("Delay_Req for unknown exchange");
    TwoWayExchange& x = node.mapped();
    x.t4 = clock_read(master_clock_, engine.now(), engine.stream(clock_stream(gm)));

    const SimDuration theta = ptp_offset_estimate(x);
    s.estimate = theta;
    ++s.completed;
    // Delay_Resp carries t4 back; its latency does not enter the estimate.
    const SimTime local_now = clock_read(s.clock, engine.now(), engine.stream(clock_stream(NodeId::of(s.id))));
    const SimDuration error = (local_now - theta) - engine.now();
    s.errors.push_back(error);

    const std::string node_name = to_string(s.id);
    engine.trace().append(engine.now(), trace_kind::ptp_exchange, node_name,
                          {kv("exchange", std::int64_t{msg->exchange}), kv("t1", x.t1.ns), kv("t2", x.t2.ns),
                           kv("t3", x.t3.ns), kv("t4", x.t4.ns), kv("offset_ns", theta.ns)});
    engine.trace().append(engine.now(), trace_kind::sync_error, node_name, {kv("error_ns", error.ns)});
    return true;
}

std::optional<SimDuration> PtpSession::offset_estimate(StationId id) const { return slave(id).estimate; }
const std::vector<SimDuration>& PtpSession::errors(StationId id) const { return slave(id).errors; }
std::uint32_t PtpSession::completed(StationId id) const { return slave(id).completed; }

} // namespace rbissim
