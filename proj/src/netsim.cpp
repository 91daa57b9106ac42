#include "rbissim/netsim.hpp"

#include <algorithm>
#include <exception>

namespace rbissim {

std::string to_string(NodeId n)
{
    switch (n.kind) {
    case NodeId::Kind::ap: return "ap" + std::to_string(n.index);
    case NodeId::Kind::station: return "sta" + std::to_string(n.index);
    case NodeId::Kind::grandmaster: return "gm";
    case NodeId::Kind::database: return "db";
    case NodeId::Kind::carriage: return "carriage" + std::to_string(n.index);
    }
    return "?";
}

std::string_view frame_kind(const Frame& f)
{
    struct Visitor {
        std::string_view operator()(const BeaconFrame&) const { return "beacon"; }
        std::string_view operator()(const CorrectionRecord&) const { return "correction"; }
        std::string_view operator()(const ApPairOffset&) const { return "ap_offset"; }
        std::string_view operator()(const OffsetMatrix&) const { return "offset_matrix"; }
        std::string_view operator()(const OffsetQuery&) const { return "offset_query"; }
        std::string_view operator()(const OffsetReply&) const { return "offset_reply"; }
        std::string_view operator()(const PtpMessage& m) const
        {
            return m.type == PtpMessage::Type::sync ? "ptp_sync" : "ptp_delay_req";
        }
    };
    return std::visit(Visitor{}, f);
}

std::string describe(const Event& e)
{
    std::string head = "event seq=" + std::to_string(e.seq) + " at " + to_string(e.fire_time) + ": ";
    struct Visitor {
        std::string operator()(const BeaconTx& b) const { return "BeaconTx(" + to_string(b.ap) + ")"; }
        std::string operator()(const FrameDelivery& d) const
        {
            return "FrameDelivery(" + to_string(d.from) + "->" + to_string(d.to) + ", " +
                   std::string(frame_kind(d.frame)) + ")";
        }
        std::string operator()(const TimerExpiry& t) const
        {
            return "TimerExpiry(" + to_string(t.node) + ", tag=" + std::to_string(t.tag) + ")";
        }
        std::string operator()(const MotionTrigger& m) const
        {
            return "MotionTrigger(carriage" + std::to_string(m.carriage) + ")";
        }
    };
    return head + std::visit(Visitor{}, e.payload);
}

EngineError::EngineError(const Event& event, const std::string& what)
    : std::runtime_error(describe(event) + ": " + what), fire_time_(event.fire_time), seq_(event.seq)
{
}

Engine::Engine(std::uint64_t master_seed) : master_seed_(master_seed) {}

std::uint64_t Engine::schedule(SimTime at, EventPayload payload)
{
    if (at < now_)
        throw std::logic_error("cannot schedule at " + to_string(at) + ", engine time is " + to_string(now_));
    const std::uint64_t seq = next_seq_++;
    queue_.push(Event{at, seq, std::move(payload)});
    return seq;
}

const TraceLog& Engine::run_until(SimTime t_end, EventHandler& handler)
{
    if (t_end < now_) throw std::logic_error("run_until target lies in the past");
    while (!queue_.empty() && queue_.top().fire_time <= t_end) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.fire_time;
        ++executed_;
        try {
            handler.handle(*this, ev);
        }
        catch (const EngineError&) {
            throw;
        }
        catch (const std::exception& ex) {
            throw EngineError(ev, ex.what());
        }
    }
    now_ = t_end;
    return trace_;
}

RngState& Engine::stream(std::string_view key)
{
    auto it = streams_.find(key);
    if (it == streams_.end())
        it = streams_.emplace(std::string(key), RngState(derive_stream_seed(master_seed_, key))).first;
    return it->second;
}

const ApNode& Topology::ap(ApId id) const
{
    const auto it = std::find_if(aps.begin(), aps.end(), [&](const ApNode& a) { return a.id == id; });
    if (it == aps.end()) throw TopologyError("unknown AP " + to_string(id));
    return *it;
}

const StationNode& Topology::station(StationId id) const
{
    const auto it = std::find_if(stations.begin(), stations.end(), [&](const StationNode& s) { return s.id == id; });
    if (it == stations.end()) throw TopologyError("unknown station " + to_string(id));
    return *it;
}

StationNode& Topology::station(StationId id)
{
    return const_cast<StationNode&>(std::as_const(*this).station(id));
}

bool Topology::has_ap(ApId id) const
{
    return std::any_of(aps.begin(), aps.end(), [&](const ApNode& a) { return a.id == id; });
}

bool Topology::has_station(StationId id) const
{
    return std::any_of(stations.begin(), stations.end(), [&](const StationNode& s) { return s.id == id; });
}

const WirelessLinkModel& Topology::link(ApId ap, StationId sta) const
{
    const auto it = links.find({ap, sta});
    return it == links.end() ? default_link : it->second;
}

std::vector<StationId> Topology::receivers(ApId ap) const
{
    std::vector<StationId> out;
    for (const auto& s : stations)
        if (s.in_range.contains(ap)) out.push_back(s.id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Topology::violations() const
{
    std::vector<std::string> v;
    if (aps.empty()) v.push_back("topology has no access points");
    std::set<ApId> ap_ids;
    for (const auto& a : aps) {
        if (!ap_ids.insert(a.id).second) v.push_back("duplicate AP id " + std::to_string(a.id.value));
        if (a.sender_access_delay.support_min().ns < 0)
            v.push_back("sender access delay of " + to_string(a.id) + " can be negative");
    }
    std::set<StationId> sta_ids;
    for (const auto& s : stations) {
        if (!sta_ids.insert(s.id).second) v.push_back("duplicate station id " + std::to_string(s.id.value));
        for (const ApId a : s.in_range)
            if (!ap_ids.contains(a)) v.push_back(to_string(s.id) + " lists unknown AP " + to_string(a) + " in range");
        if (!s.in_range.contains(s.associated))
            v.push_back(to_string(s.id) + " is associated with " + to_string(s.associated) +
                        " which is not in its range");
    }
    if (!sta_ids.contains(reference_station))
        v.push_back("reference station " + to_string(reference_station) + " is not a station");
    const auto check_link = [&](const WirelessLinkModel& l, const std::string& where) {
        if (l.propagation_delay + l.receiver_jitter.support_min() < SimDuration{})
            v.push_back(where + ": propagation delay plus receiver jitter can be negative");
        if (!(l.loss_probability >= 0.0 && l.loss_probability <= 1.0))
            v.push_back(where + ": loss probability outside [0, 1]");
    };
    check_link(default_link, "default link");
    for (const auto& [key, l] : links) {
        if (!ap_ids.contains(key.first) || !sta_ids.contains(key.second))
            v.push_back("link " + to_string(key.first) + "-" + to_string(key.second) + " names an unknown node");
        check_link(l, "link " + to_string(key.first) + "-" + to_string(key.second));
    }
    if (wired.delay.ns < 0) v.push_back("wired delay is negative");
    return v;
}

Topology handover(Topology topology, StationId station, ApId to_ap)
{
    auto& s = topology.station(station);
    if (!s.in_range.contains(to_ap))
        throw TopologyError("handover of " + to_string(station) + " to " + to_string(to_ap) + ": AP out of range");
    s.associated = to_ap;
    return topology;
}

std::string access_stream(ApId ap) { return to_string(ap) + "/access"; }
std::string rx_jitter_stream(StationId sta) { return to_string(sta) + "/rxjitter"; }
std::string loss_stream(StationId sta) { return to_string(sta) + "/loss"; }

std::vector<ScheduledDelivery> broadcast(Engine& engine, const Topology& topology, ApId sender, const Frame& frame,
                                         SimTime t_tx)
{
    const ApNode& ap = topology.ap(sender);
    if (t_tx < engine.now()) throw std::logic_error("broadcast transmit time lies in the past");

    const SimDuration access = jitter_sample(ap.sender_access_delay, engine.stream(access_stream(sender)));
    const bool is_beacon = std::holds_alternative<BeaconFrame>(frame);

    std::vector<ScheduledDelivery> out;
    for (const StationId r : topology.receivers(sender)) {
        const auto& link = topology.link(sender, r);
        if (engine.stream(loss_stream(r)).bernoulli(link.loss_probability)) {
            engine.trace().append(t_tx, is_beacon ? "beacon_lost" : "frame_lost", to_string(r),
                                  {kv("from", to_string(sender))});
            continue;
        }
        const SimDuration jitter = jitter_sample(link.receiver_jitter, engine.stream(rx_jitter_stream(r)));
        const SimTime at = t_tx + access + link.propagation_delay + jitter;
        const auto seq = engine.schedule(at, FrameDelivery{NodeId::of(r), NodeId::of(sender), frame});
        out.push_back({r, at, seq});
    }
    return out;
}

} // namespace rbissim
