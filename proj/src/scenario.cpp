#include "rbissim/scenario.hpp"

#include "rbissim/rng.hpp"

#include <toml.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace rbissim {

namespace {

struct Unit {
    std::string_view suffix;
    std::int64_t ns;
};

constexpr std::array<Unit, 4> units{{{"_ns", 1}, {"_us", 1'000}, {"_ms", 1'000'000}, {"_s", 1'000'000'000}}};

class Problems {
public:
    explicit Problems(std::string source) : source_(std::move(source)) {}

    void add(const toml::node* where, const std::string& msg)
    {
        std::ostringstream out;
        out << source_;
        if (where && where->source().begin) out << ':' << where->source().begin.line << ':' << where->source().begin.column;
        out << ": " << msg;
        list_.push_back(out.str());
    }

    void add(const std::string& msg) { list_.push_back(source_ + ": " + msg); }

    bool empty() const { return list_.empty(); }
    const std::string& source() const { return source_; }
    std::vector<std::string>& list() { return list_; }

private:
    std::string source_;
    std::vector<std::string> list_;
};

/// Typed access to one TOML table that remembers which keys were consumed,
/// so that everything left over can be reported as unknown.
class Reader {
public:
    Reader(const toml::table& table, std::string path, Problems& problems)
        : table_(table), path_(std::move(path)), problems_(problems)
    {
    }

    const toml::node* node(std::string_view key)
    {
        const toml::node* n = table_.get(key);
        if (n) used_.insert(std::string(key));
        return n;
    }

    std::optional<std::int64_t> integer(std::string_view key)
    {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        if (auto v = n->value_exact<std::int64_t>()) return *v;
        if (auto d = n->value_exact<double>(); d && std::trunc(*d) == *d && std::abs(*d) < 9.0e18)
            return static_cast<std::int64_t>(*d);
        problems_.add(n, name(key) + " must be an integer");
        return std::nullopt;
    }

    std::optional<double> number(std::string_view key)
    {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        if (auto v = n->value_exact<double>()) return *v;
        if (auto i = n->value_exact<std::int64_t>()) return static_cast<double>(*i);
        problems_.add(n, name(key) + " must be a number");
        return std::nullopt;
    }

    std::optional<std::string> string(std::string_view key)
    {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        if (auto v = n->value_exact<std::string>()) return *v;
        problems_.add(n, name(key) + " must be a string");
        return std::nullopt;
    }

    std::optional<bool> boolean(std::string_view key)
    {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        if (auto v = n->value_exact<bool>()) return *v;
        problems_.add(n, name(key) + " must be a boolean");
        return std::nullopt;
    }

    /// `base` with one of the unit suffixes.
    std::optional<SimDuration> duration(std::string_view base)
    {
        std::optional<SimDuration> out;
        const toml::node* first = nullptr;
        for (const auto& unit : units) {
            const std::string key = std::string(base) + std::string(unit.suffix);
            const toml::node* n = node(key);
            if (!n) continue;
            if (first) {
                problems_.add(n, name(key) + " duplicates another spelling of " + name(base));
                continue;
            }
            first = n;
            if (auto i = n->value_exact<std::int64_t>()) {
                if (std::abs(*i) > std::numeric_limits<std::int64_t>::max() / unit.ns)
                    problems_.add(n, name(key) + " is out of range");
                else
                    out = SimDuration{*i * unit.ns};
            }
            else if (auto d = n->value_exact<double>()) {
                const double ns = *d * static_cast<double>(unit.ns);
                if (!std::isfinite(ns) || std::abs(ns) > 9.0e18)
                    problems_.add(n, name(key) + " is out of range");
                else
                    out = SimDuration{std::llround(ns)};
            }
            else {
                problems_.add(n, name(key) + " must be a number");
            }
        }
        return out;
    }

    const toml::table* table(std::string_view key)
    {
        const toml::node* n = node(key);
        if (!n) return nullptr;
        if (const auto* t = n->as_table()) return t;
        problems_.add(n, name(key) + " must be a table");
        return nullptr;
    }

    const toml::array* array(std::string_view key)
    {
        const toml::node* n = node(key);
        if (!n) return nullptr;
        if (const auto* a = n->as_array()) return a;
        problems_.add(n, name(key) + " must be an array");
        return nullptr;
    }

    void finish()
    {
        for (const auto& [key, value] : table_) {
            if (!used_.contains(std::string(key.str())))
                problems_.add(&value, "unknown key '" + name(key.str()) + "'");
        }
    }

    std::string name(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }
    const std::string& path() const { return path_; }
    Problems& problems() { return problems_; }
    const toml::table& raw() const { return table_; }

private:
    const toml::table& table_;
    std::string path_;
    Problems& problems_;
    std::set<std::string> used_;
};

template <class T>
std::optional<T> in_range_int(Reader& r, std::string_view key, std::int64_t lo, std::int64_t hi)
{
    const auto v = r.integer(key);
    if (!v) return std::nullopt;
    if (*v < lo || *v > hi) {
        r.problems().add(r.node(key), r.name(key) + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return std::nullopt;
    }
    return static_cast<T>(*v);
}

std::optional<ApId> read_ap_id(Reader& r, std::string_view key)
{
    if (auto v = in_range_int<std::uint32_t>(r, key, 0, std::numeric_limits<std::uint32_t>::max())) return ApId{*v};
    return std::nullopt;
}

std::optional<StationId> read_station_id(Reader& r, std::string_view key)
{
    if (auto v = in_range_int<std::uint32_t>(r, key, 0, std::numeric_limits<std::uint32_t>::max())) return StationId{*v};
    return std::nullopt;
}

JitterSpec read_jitter(const toml::table& t, const std::string& path, Problems& problems)
{
    Reader r(t, path, problems);
    const std::string kind = r.string("kind").value_or("none");
    JitterSpec spec;
    try {
        if (kind == "none") {
        }
        else if (kind == "uniform") {
            spec = JitterSpec::uniform(r.duration("lo").value_or(SimDuration{}), r.duration("hi").value_or(SimDuration{}));
        }
        else if (kind == "normal") {
            spec = JitterSpec::normal(r.duration("mean").value_or(SimDuration{}),
                                      r.duration("sigma").value_or(SimDuration{}));
        }
        else {
            problems.add(r.node("kind"), path + ".kind must be none, uniform or normal");
        }
    }
    catch (const std::invalid_argument& e) {
        problems.add(&t, path + ": " + e.what());
    }
    r.finish();
    return spec;
}

JitterSpec read_jitter(Reader& parent, std::string_view key, JitterSpec fallback = {})
{
    const toml::table* t = parent.table(key);
    return t ? read_jitter(*t, parent.name(key), parent.problems()) : fallback;
}

ClockModel read_clock(Reader& parent, std::string_view key, double max_drift_ppm)
{
    const toml::table* t = parent.table(key);
    if (!t) return {};
    Reader r(*t, parent.name(key), parent.problems());
    const SimDuration offset = r.duration("offset").value_or(SimDuration{});
    Drift drift;
    const auto ppm = r.number("drift_ppm");
    const auto ppt = r.integer("drift_ppt");
    if (ppm && ppt) parent.problems().add(t, r.name("drift_ppm") + " and drift_ppt are mutually exclusive");
    if (ppm) drift = Drift::from_ppm(*ppm);
    if (ppt) drift = Drift{*ppt};
    const SimDuration granularity = r.duration("granularity").value_or(SimDuration{1});
    const JitterSpec jitter = read_jitter(r, "jitter");
    r.finish();
    try {
        return ClockModel(offset, drift, granularity, jitter, max_drift_ppm);
    }
    catch (const std::invalid_argument& e) {
        parent.problems().add(t, r.path() + ": " + e.what());
        return {};
    }
}

WirelessLinkModel read_link_fields(Reader& r, const WirelessLinkModel& fallback)
{
    WirelessLinkModel m = fallback;
    if (auto d = r.duration("propagation")) m.propagation_delay = *d;
    m.receiver_jitter = read_jitter(r, "receiver_jitter", fallback.receiver_jitter);
    if (auto p = r.number("loss")) m.loss_probability = *p;
    return m;
}

template <class F>
void for_each_table(Reader& parent, std::string_view key, F&& f)
{
    const toml::array* arr = parent.array(key);
    if (!arr) return;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const toml::node& n = (*arr)[i];
        const std::string path = parent.name(key) + "[" + std::to_string(i) + "]";
        if (const auto* t = n.as_table()) {
            Reader r(*t, path, parent.problems());
            f(r);
            r.finish();
        }
        else {
            parent.problems().add(&n, path + " must be a table");
        }
    }
}

std::vector<std::int64_t> read_int_list(Reader& r, std::string_view key)
{
    std::vector<std::int64_t> out;
    const toml::array* arr = r.array(key);
    if (!arr) return out;
    for (const auto& n : *arr) {
        if (auto v = n.value_exact<std::int64_t>(); v && *v >= 0 && *v <= std::numeric_limits<std::uint32_t>::max())
            out.push_back(*v);
        else
            r.problems().add(&n, r.name(key) + " must hold non-negative integer ids");
    }
    return out;
}

Bssid default_bssid(ApId id)
{
    Bssid b;
    b.octets = {0x02, 0x00, static_cast<std::uint8_t>(id.value >> 24), static_cast<std::uint8_t>(id.value >> 16),
                static_cast<std::uint8_t>(id.value >> 8), static_cast<std::uint8_t>(id.value)};
    return b;
}

ApConfig read_ap(Reader& r, double max_drift)
{
    ApConfig ap;
    if (auto id = read_ap_id(r, "id"))
        ap.id = *id;
    else if (!r.node("id"))
        r.problems().add(&r.raw(), r.path() + ".id is required");
    ap.bssid = default_bssid(ap.id);
    if (auto text = r.string("bssid")) {
        try {
            ap.bssid = Bssid::parse(*text);
        }
        catch (const std::invalid_argument& e) {
            r.problems().add(r.node("bssid"), e.what());
        }
    }
    ap.ssid = r.string("ssid").value_or(to_string(ap.id));
    if (auto bi = in_range_int<std::uint16_t>(r, "beacon_interval_tu", 1, 65535)) ap.beacon_interval_tu = *bi;
    if (auto e = r.duration("tsf_epoch")) ap.tsf_epoch = SimTime{} + *e;
    ap.tsf_clock = read_clock(r, "clock", max_drift);
    ap.access_delay = read_jitter(r, "access_delay");
    return ap;
}

StationConfig read_station(Reader& r, double max_drift)
{
    StationConfig st;
    if (auto id = read_station_id(r, "id"))
        st.id = *id;
    else if (!r.node("id"))
        r.problems().add(&r.raw(), r.path() + ".id is required");
    for (auto v : read_int_list(r, "in_range")) st.in_range.insert(ApId{static_cast<std::uint32_t>(v)});
    if (auto a = read_ap_id(r, "associated"))
        st.associated = *a;
    else if (!st.in_range.empty())
        st.associated = *st.in_range.begin();
    st.clock = read_clock(r, "clock", max_drift);
    if (const toml::array* arr = r.array("bridges")) {
        for (const auto& n : *arr) {
            const auto* pair = n.as_array();
            if (!pair || pair->size() != 2 || !(*pair)[0].is_integer() || !(*pair)[1].is_integer()) {
                r.problems().add(&n, r.name("bridges") + " entries must be [ap_i, ap_j]");
                continue;
            }
            st.bridges.emplace_back(ApId{static_cast<std::uint32_t>(*(*pair)[0].value<std::int64_t>())},
                                    ApId{static_cast<std::uint32_t>(*(*pair)[1].value<std::int64_t>())});
        }
    }
    st.uplink_access_delay = read_jitter(r, "uplink_access_delay");
    return st;
}

DemonstratorConfig read_demonstrator(Reader& r)
{
    DemonstratorConfig d;
    if (auto v = read_station_id(r, "station_a")) d.station_a = *v;
    if (auto v = read_station_id(r, "station_b")) d.station_b = *v;
    if (!r.raw().get("station_a") || !r.raw().get("station_b"))
        r.problems().add(&r.raw(), r.path() + " needs station_a and station_b");
    if (auto v = r.duration("trigger_at"))
        d.trigger_at = SimTime{} + *v;
    else
        r.problems().add(&r.raw(), r.path() + ".trigger_at is required");
    if (auto v = r.duration("arm_lead")) d.arm_lead = *v;
    if (auto v = r.number("p1")) d.profile.p1 = *v;
    if (auto v = r.number("p2")) d.profile.p2 = *v;
    if (auto v = r.number("v_max")) d.profile.v_max = *v;
    if (auto v = r.number("a_max")) d.profile.a_max = *v;
    d.gpio_latency = read_jitter(r, "gpio_latency", d.gpio_latency);
    if (auto v = r.boolean("sensor_noise")) d.sensor_noise = *v;
    if (auto v = r.duration("sample_period")) d.sample_period = *v;
    if (const toml::table* t = r.table("sensor")) {
        Reader s(*t, r.name("sensor"), r.problems());
        if (auto v = s.number("resolution_at_p1")) d.sensor.resolution_at_p1 = *v;
        if (auto v = s.number("resolution_at_p2")) d.sensor.resolution_at_p2 = *v;
        if (auto v = in_range_int<int>(s, "adc_bits", 1, 32)) d.sensor.adc_bits = *v;
        if (auto v = s.number("axis_min")) d.sensor.axis_min = *v;
        if (auto v = s.number("axis_span")) d.sensor.axis_span = *v;
        s.finish();
    }
    return d;
}

Scenario read_scenario(const toml::table& root, Problems& problems)
{
    Scenario sc;
    Reader r(root, "", problems);

    if (auto v = r.string("name")) sc.name = *v;
    if (auto v = r.integer("seed")) sc.seed = static_cast<std::uint64_t>(*v);
    if (auto v = r.string("method")) {
        try {
            sc.method = parse_method(*v);
        }
        catch (const std::invalid_argument& e) {
            problems.add(r.node("method"), e.what());
        }
    }
    if (auto v = r.duration("duration")) sc.duration = *v;
    if (auto v = r.duration("sample_interval")) sc.sample_interval = *v;
    if (auto v = in_range_int<std::size_t>(r, "ring_capacity", 1, 1 << 20)) sc.ring_capacity = *v;
    if (auto v = r.string("cross_ap_route")) {
        if (*v == "offset_matrix")
            sc.cross_ap_route = CrossApRoute::offset_matrix;
        else if (*v == "derived")
            sc.cross_ap_route = CrossApRoute::derived;
        else
            problems.add(r.node("cross_ap_route"), "cross_ap_route must be offset_matrix or derived");
    }
    if (auto v = r.number("max_drift_ppm")) sc.max_drift_ppm = *v;
    if (auto v = read_station_id(r, "reference_station"))
        sc.reference_station = *v;
    else if (!root.get("reference_station"))
        problems.add("reference_station is required");

    if (const toml::table* t = r.table("wireless")) {
        Reader w(*t, "wireless", problems);
        sc.wireless = read_link_fields(w, {});
        w.finish();
    }

    for_each_table(r, "ap", [&](Reader& a) { sc.aps.push_back(read_ap(a, sc.max_drift_ppm)); });
    for_each_table(r, "station", [&](Reader& s) { sc.stations.push_back(read_station(s, sc.max_drift_ppm)); });
    for_each_table(r, "link", [&](Reader& l) {
        LinkConfig link;
        if (auto v = read_ap_id(l, "ap")) link.ap = *v;
        if (auto v = read_station_id(l, "station")) link.station = *v;
        link.model = read_link_fields(l, sc.wireless);
        sc.links.push_back(link);
    });
    for_each_table(r, "handover", [&](Reader& h) {
        HandoverStep step;
        if (auto v = h.duration("time"))
            step.at = SimTime{} + *v;
        else
            problems.add(&h.raw(), h.path() + ".time is required");
        if (auto v = read_station_id(h, "station")) step.station = *v;
        if (auto v = read_ap_id(h, "to_ap")) step.to_ap = *v;
        sc.handovers.push_back(step);
    });

    if (const toml::table* t = r.table("dissemination")) {
        Reader d(*t, "dissemination", problems);
        if (auto v = d.string("mode")) {
            if (*v == "unicast")
                sc.dissemination.mode = DisseminationMode::unicast;
            else if (*v == "broadcast")
                sc.dissemination.mode = DisseminationMode::broadcast;
            else
                problems.add(d.node("mode"), "dissemination.mode must be unicast or broadcast");
        }
        if (auto v = d.duration("latency")) sc.dissemination.latency = *v;
        sc.dissemination.jitter = read_jitter(d, "jitter");
        d.finish();
    }

    if (const toml::table* t = r.table("offsetdb")) {
        Reader o(*t, "offsetdb", problems);
        auto& p = sc.offsetdb.policy;
        if (auto v = o.number("handover_rate_threshold")) p.handover_rate_threshold = *v;
        if (auto v = in_range_int<std::uint64_t>(o, "entry_size_bytes", 1, 1 << 20)) p.entry_size_bytes = *v;
        if (auto v = in_range_int<std::uint64_t>(o, "payload_budget_bytes", 0, std::int64_t{1} << 40))
            p.payload_budget_bytes = *v;
        if (auto v = o.duration("cyclic_period")) p.cyclic_period = *v;
        if (auto v = o.number("channel_busy")) sc.offsetdb.channel_busy = *v;
        if (auto v = o.duration("latency")) sc.offsetdb.latency = *v;
        o.finish();
    }

    if (const toml::table* t = r.table("ptp")) {
        Reader p(*t, "ptp", problems);
        sc.ptp.master_clock = read_clock(p, "master_clock", sc.max_drift_ppm);
        if (auto v = p.duration("sync_interval")) sc.ptp.sync_interval = *v;
        if (auto v = p.duration("turnaround")) sc.ptp.turnaround = *v;
        if (auto v = p.duration("wired_delay")) sc.ptp.wired_delay = *v;
        if (auto v = p.duration("wired_asymmetry")) sc.ptp.wired_asymmetry = *v;
        p.finish();
    }

    if (const toml::table* t = r.table("demonstrator")) {
        Reader d(*t, "demonstrator", problems);
        sc.demonstrator = read_demonstrator(d);
        d.finish();
    }

    r.finish();
    return sc;
}

// ---------------------------------------------------------------------------
// Serialization

toml::table jitter_table(const JitterSpec& j)
{
    switch (j.kind()) {
    case JitterSpec::Kind::none: return toml::table{{"kind", "none"}};
    case JitterSpec::Kind::uniform: return toml::table{{"kind", "uniform"}, {"lo_ns", j.a().ns}, {"hi_ns", j.b().ns}};
    case JitterSpec::Kind::normal: return toml::table{{"kind", "normal"}, {"mean_ns", j.a().ns}, {"sigma_ns", j.b().ns}};
    }
    return {};
}

toml::table clock_table(const ClockModel& c)
{
    return toml::table{{"offset_ns", c.initial_offset().ns},
                       {"drift_ppt", c.drift().ppt},
                       {"granularity_ns", c.granularity().ns},
                       {"jitter", jitter_table(c.read_jitter())}};
}

void put_link(toml::table& t, const WirelessLinkModel& m)
{
    t.insert_or_assign("propagation_ns", m.propagation_delay.ns);
    t.insert_or_assign("receiver_jitter", jitter_table(m.receiver_jitter));
    t.insert_or_assign("loss", m.loss_probability);
}

std::int64_t id64(std::uint32_t v) { return static_cast<std::int64_t>(v); }

} // namespace

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::rbis: return "rbis";
    case Method::gptp_wired: return "gptp_wired";
    case Method::ptp_wifi: return "ptp_wifi";
    }
    return "?";
}

Method parse_method(std::string_view text)
{
    if (text == "rbis") return Method::rbis;
    if (text == "gptp_wired") return Method::gptp_wired;
    if (text == "ptp_wifi") return Method::ptp_wifi;
    throw std::invalid_argument("unknown method '" + std::string(text) + "' (expected rbis, gptp_wired or ptp_wifi)");
}

const ApConfig& Scenario::ap(ApId id) const
{
    const auto it = std::find_if(aps.begin(), aps.end(), [&](const ApConfig& a) { return a.id == id; });
    if (it == aps.end()) throw std::out_of_range("no AP " + to_string(id));
    return *it;
}

const StationConfig& Scenario::station(StationId id) const
{
    const auto it = std::find_if(stations.begin(), stations.end(), [&](const StationConfig& s) { return s.id == id; });
    if (it == stations.end()) throw std::out_of_range("no station " + to_string(id));
    return *it;
}

Topology Scenario::topology() const
{
    Topology t;
    for (const auto& a : aps) t.aps.push_back({a.id, a.access_delay});
    for (const auto& s : stations) t.stations.push_back({s.id, s.in_range, s.associated});
    t.reference_station = reference_station;
    t.default_link = wireless;
    for (const auto& l : links) t.links[{l.ap, l.station}] = l.model;
    return t;
}

std::vector<std::string> Scenario::violations() const
{
    std::vector<std::string> v = topology().violations();
    auto has_ap = [&](ApId id) { return std::any_of(aps.begin(), aps.end(), [&](const auto& a) { return a.id == id; }); };
    auto has_station = [&](StationId id) {
        return std::any_of(stations.begin(), stations.end(), [&](const auto& s) { return s.id == id; });
    };

    if (aps.empty()) v.push_back("scenario has no APs");
    if (stations.empty()) v.push_back("scenario has no stations");
    if (duration.ns <= 0) v.push_back("duration must be positive");
    if (sample_interval.ns <= 0) v.push_back("sample_interval must be positive");
    if (ring_capacity < 1) v.push_back("ring_capacity must be at least 1");

    std::set<Bssid> bssids;
    for (const auto& a : aps) {
        if (!bssids.insert(a.bssid).second) v.push_back("duplicate bssid " + a.bssid.to_string());
        if (a.ssid.size() > max_ssid_length) v.push_back(to_string(a.id) + " ssid exceeds 32 bytes");
        if (a.beacon_interval_tu < 1) v.push_back(to_string(a.id) + " beacon_interval_tu must be at least 1");
    }

    std::set<ApId> covered;
    if (has_station(reference_station)) covered = station(reference_station).in_range;
    if (method == Method::rbis && has_station(reference_station) && covered.empty())
        v.push_back("reference station hears no AP");

    for (const auto& s : stations) {
        for (const auto& [i, j] : s.bridges) {
            const std::string name = to_string(s.id) + " bridge [" + std::to_string(i.value) + ", " +
                                     std::to_string(j.value) + "]";
            if (s.id == reference_station) v.push_back(name + " is on the reference station");
            if (!s.in_range.contains(i) || !s.in_range.contains(j)) v.push_back(name + " uses an AP out of range");
            if (!covered.contains(i)) v.push_back(name + ": first AP must be heard by the reference");
            if (covered.contains(j)) v.push_back(name + ": second AP must not be heard by the reference");
        }
    }

    for (std::size_t k = 0; k < handovers.size(); ++k) {
        const auto& h = handovers[k];
        const std::string name = "handover[" + std::to_string(k) + "]";
        if (!has_station(h.station)) {
            v.push_back(name + " names unknown station " + to_string(h.station));
            continue;
        }
        if (!has_ap(h.to_ap)) v.push_back(name + " names unknown AP " + to_string(h.to_ap));
        else if (!station(h.station).in_range.contains(h.to_ap))
            v.push_back(name + ": " + to_string(h.to_ap) + " is not in range of " + to_string(h.station));
        if (h.at.ns < 0 || h.at.ns > duration.ns) v.push_back(name + " time lies outside the run");
        if (h.station == reference_station) v.push_back(name + " moves the reference station");
    }

    if (dissemination.latency + dissemination.jitter.support_min() < SimDuration{})
        v.push_back("dissemination latency can be negative");
    if (offsetdb.channel_busy < 0.0 || offsetdb.channel_busy >= 1.0) v.push_back("offsetdb.channel_busy must be in [0, 1)");
    if (offsetdb.latency.ns < 0) v.push_back("offsetdb.latency must not be negative");
    if (offsetdb.policy.cyclic_period.ns <= 0) v.push_back("offsetdb.cyclic_period must be positive");

    if (ptp.sync_interval.ns <= 0) v.push_back("ptp.sync_interval must be positive");
    if (ptp.turnaround.ns < 0) v.push_back("ptp.turnaround must not be negative");
    if (ptp.wired_delay.ns < 0 || (ptp.wired_delay + ptp.wired_asymmetry).ns < 0)
        v.push_back("ptp wired delays must not be negative");
    for (const auto& s : stations) {
        if (s.uplink_access_delay.support_min().ns < 0)
            v.push_back(to_string(s.id) + " uplink_access_delay can be negative");
    }

    if (demonstrator) {
        const auto& d = *demonstrator;
        if (!has_station(d.station_a) || !has_station(d.station_b)) v.push_back("demonstrator names an unknown station");
        if (d.station_a == d.station_b) v.push_back("demonstrator stations must differ");
        if ((d.trigger_at - d.arm_lead).ns < 0) v.push_back("demonstrator arms before the run starts");
        if (d.trigger_at.ns >= duration.ns) v.push_back("demonstrator trigger lies outside the run");
        if (d.arm_lead.ns < 0) v.push_back("demonstrator.arm_lead must not be negative");
        if (!(d.profile.v_max > 0.0) || !(d.profile.a_max > 0.0)) v.push_back("demonstrator v_max and a_max must be positive");
        if (d.sample_period.ns <= 0) v.push_back("demonstrator.sample_period must be positive");
        if (d.gpio_latency.support_min().ns < 0) v.push_back("demonstrator.gpio_latency can be negative");
        if (!(d.sensor.axis_span > 0.0)) v.push_back("demonstrator.sensor.axis_span must be positive");
    }
    return v;
}

namespace {

std::string join_problems(const std::string& source, const std::vector<std::string>& problems)
{
    std::string msg = "invalid scenario " + source + ":";
    for (const auto& p : problems) msg += "\n  " + p;
    return msg;
}

} // namespace

ScenarioError::ScenarioError(std::string source, std::vector<std::string> problems)
    : std::runtime_error(join_problems(source, problems)), problems_(std::move(problems))
{
}

namespace {

Scenario build(const toml::table& root, std::string_view source)
{
    Problems problems{std::string(source)};
    Scenario sc = read_scenario(root, problems);
    if (problems.empty()) {
        for (auto& v : sc.violations()) problems.add(v);
    }
    if (!problems.empty()) throw ScenarioError(std::string(source), std::move(problems.list()));
    return sc;
}

toml::table parse_toml(std::string_view text, std::string_view source)
{
    try {
        return toml::parse(text, source);
    }
    catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << source << ':' << e.source().begin.line << ':' << e.source().begin.column << ": " << e.description();
        throw ScenarioError(std::string(source), {msg.str()});
    }
}

} // namespace

Scenario parse_scenario(std::string_view text, std::string_view source)
{
    return build(parse_toml(text, source), source);
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path.string(), {path.string() + ": cannot open file"});
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path.string());
}

std::string serialize_scenario(const Scenario& s)
{
    toml::table root;
    root.insert("name", s.name);
    root.insert("seed", static_cast<std::int64_t>(s.seed));
    root.insert("method", std::string(to_string(s.method)));
    root.insert("duration_ns", s.duration.ns);
    root.insert("sample_interval_ns", s.sample_interval.ns);
    root.insert("ring_capacity", static_cast<std::int64_t>(s.ring_capacity));
    root.insert("cross_ap_route", s.cross_ap_route == CrossApRoute::offset_matrix ? "offset_matrix" : "derived");
    root.insert("max_drift_ppm", s.max_drift_ppm);
    root.insert("reference_station", id64(s.reference_station.value));

    toml::table wireless;
    put_link(wireless, s.wireless);
    root.insert("wireless", wireless);

    toml::array aps;
    for (const auto& a : s.aps) {
        aps.push_back(toml::table{{"id", id64(a.id.value)},
                                  {"bssid", a.bssid.to_string()},
                                  {"ssid", a.ssid},
                                  {"beacon_interval_tu", std::int64_t{a.beacon_interval_tu}},
                                  {"tsf_epoch_ns", a.tsf_epoch.ns},
                                  {"clock", clock_table(a.tsf_clock)},
                                  {"access_delay", jitter_table(a.access_delay)}});
    }
    root.insert("ap", aps);

    toml::array stations;
    for (const auto& st : s.stations) {
        toml::array range;
        for (const auto& a : st.in_range) range.push_back(id64(a.value));
        toml::array bridges;
        for (const auto& [i, j] : st.bridges) bridges.push_back(toml::array{id64(i.value), id64(j.value)});
        stations.push_back(toml::table{{"id", id64(st.id.value)},
                                       {"in_range", range},
                                       {"associated", id64(st.associated.value)},
                                       {"clock", clock_table(st.clock)},
                                       {"bridges", bridges},
                                       {"uplink_access_delay", jitter_table(st.uplink_access_delay)}});
    }
    root.insert("station", stations);

    if (!s.links.empty()) {
        toml::array links;
        for (const auto& l : s.links) {
            toml::table t{{"ap", id64(l.ap.value)}, {"station", id64(l.station.value)}};
            put_link(t, l.model);
            links.push_back(t);
        }
        root.insert("link", links);
    }

    if (!s.handovers.empty()) {
        toml::array hs;
        for (const auto& h : s.handovers)
            hs.push_back(toml::table{{"time_ns", h.at.ns}, {"station", id64(h.station.value)}, {"to_ap", id64(h.to_ap.value)}});
        root.insert("handover", hs);
    }

    root.insert("dissemination",
                toml::table{{"mode", s.dissemination.mode == DisseminationMode::unicast ? "unicast" : "broadcast"},
                            {"latency_ns", s.dissemination.latency.ns},
                            {"jitter", jitter_table(s.dissemination.jitter)}});

    const auto& p = s.offsetdb.policy;
    root.insert("offsetdb", toml::table{{"handover_rate_threshold", p.handover_rate_threshold},
                                        {"entry_size_bytes", static_cast<std::int64_t>(p.entry_size_bytes)},
                                        {"payload_budget_bytes", static_cast<std::int64_t>(p.payload_budget_bytes)},
                                        {"cyclic_period_ns", p.cyclic_period.ns},
                                        {"channel_busy", s.offsetdb.channel_busy},
                                        {"latency_ns", s.offsetdb.latency.ns}});

    root.insert("ptp", toml::table{{"master_clock", clock_table(s.ptp.master_clock)},
                                   {"sync_interval_ns", s.ptp.sync_interval.ns},
                                   {"turnaround_ns", s.ptp.turnaround.ns},
                                   {"wired_delay_ns", s.ptp.wired_delay.ns},
                                   {"wired_asymmetry_ns", s.ptp.wired_asymmetry.ns}});

    if (s.demonstrator) {
        const auto& d = *s.demonstrator;
        root.insert("demonstrator",
                    toml::table{{"station_a", id64(d.station_a.value)},
                                {"station_b", id64(d.station_b.value)},
                                {"trigger_at_ns", d.trigger_at.ns},
                                {"arm_lead_ns", d.arm_lead.ns},
                                {"p1", d.profile.p1},
                                {"p2", d.profile.p2},
                                {"v_max", d.profile.v_max},
                                {"a_max", d.profile.a_max},
                                {"gpio_latency", jitter_table(d.gpio_latency)},
                                {"sensor_noise", d.sensor_noise},
                                {"sample_period_ns", d.sample_period.ns},
                                {"sensor", toml::table{{"resolution_at_p1", d.sensor.resolution_at_p1},
                                                       {"resolution_at_p2", d.sensor.resolution_at_p2},
                                                       {"adc_bits", std::int64_t{d.sensor.adc_bits}},
                                                       {"axis_min", d.sensor.axis_min},
                                                       {"axis_span", d.sensor.axis_span}}}});
    }

    std::ostringstream out;
    out << root << '\n';
    return out.str();
}

std::string scenario_hash(const Scenario& s)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_scenario(s))));
    return buf;
}

Scenario with_parameter(std::string_view text, std::string_view path, double value, std::string_view source)
{
    toml::table root = parse_toml(text, source);
    const std::string where = std::string(source) + ": parameter '" + std::string(path) + "'";
    if (path.empty()) throw ScenarioError(std::string(source), {where + " is empty"});

    std::vector<std::string> parts;
    for (std::size_t start = 0;;) {
        const std::size_t dot = path.find('.', start);
        parts.emplace_back(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }

    toml::node* parent = &root;
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        toml::node* next = nullptr;
        if (auto* t = parent->as_table()) {
            next = t->get(parts[k]);
        }
        else if (auto* a = parent->as_array()) {
            const auto& seg = parts[k];
            if (!seg.empty() && std::all_of(seg.begin(), seg.end(), [](char c) { return c >= '0' && c <= '9'; })) {
                const std::size_t idx = std::stoul(seg);
                if (idx < a->size()) next = a->get(idx);
            }
        }
        if (!next) throw ScenarioError(std::string(source), {where + " does not exist"});
        parent = next;
    }

    const bool integral = std::trunc(value) == value && std::abs(value) < 9.0e18;
    const std::string& leaf = parts.back();
    toml::node* target = nullptr;
    if (auto* t = parent->as_table()) {
        target = t->get(leaf);
        if (!target) {
            if (integral)
                t->insert(leaf, static_cast<std::int64_t>(value));
            else
                t->insert(leaf, value);
            return build(root, source);
        }
    }
    else if (auto* a = parent->as_array()) {
        if (std::all_of(leaf.begin(), leaf.end(), [](char c) { return c >= '0' && c <= '9'; }) && !leaf.empty() &&
            std::stoul(leaf) < a->size())
            target = a->get(std::stoul(leaf));
    }
    if (!target) throw ScenarioError(std::string(source), {where + " does not exist"});

    if (auto* i = target->as_integer()) {
        if (!integral) throw ScenarioError(std::string(source), {where + " expects an integer"});
        *i = static_cast<std::int64_t>(value);
    }
    else if (auto* f = target->as_floating_point()) {
        *f = value;
    }
    else {
        throw ScenarioError(std::string(source), {where + " is not numeric"});
    }
    return build(root, source);
}

} // namespace rbissim
