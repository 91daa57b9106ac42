#include "rbissim/clock.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rbissim {

namespace {

__extension__ using i128 = __int128;

constexpr i128 ppt_denominator = 1'000'000'000'000;
constexpr double truncation_sigmas = 4.0;

i128 floor_div128(i128 a, i128 b)
{
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

std::string to_string(SimDuration d) { return std::to_string(d.ns) + "ns"; }
std::string to_string(SimTime t) { return std::to_string(t.ns) + "ns"; }

JitterSpec JitterSpec::uniform(SimDuration lo, SimDuration hi)
{
    if (lo > hi) throw std::invalid_argument("uniform jitter requires lo <= hi");
    JitterSpec s;
    s.kind_ = Kind::uniform;
    s.a_ = lo;
    s.b_ = hi;
    return s;
}

JitterSpec JitterSpec::normal(SimDuration mean, SimDuration sigma)
{
    if (sigma.ns < 0) throw std::invalid_argument("normal jitter requires sigma >= 0");
    JitterSpec s;
    s.kind_ = Kind::normal;
    s.a_ = mean;
    s.b_ = sigma;
    return s;
}

SimDuration JitterSpec::support_min() const
{
    switch (kind_) {
    case Kind::none: return {};
    case Kind::uniform: return a_;
    case Kind::normal: return a_ - b_ * 4;
    }
    return {};
}

SimDuration JitterSpec::support_max() const
{
    switch (kind_) {
    case Kind::none: return {};
    case Kind::uniform: return b_;
    case Kind::normal: return a_ + b_ * 4;
    }
    return {};
}

SimDuration jitter_sample(const JitterSpec& spec, RngState& rng)
{
    switch (spec.kind()) {
    case JitterSpec::Kind::none:
        return {};
    case JitterSpec::Kind::uniform:
        return {rng.uniform_int(spec.a().ns, spec.b().ns)};
    case JitterSpec::Kind::normal: {
        if (spec.b().ns == 0) return spec.a();
        double z = rng.standard_normal();
        while (std::abs(z) > truncation_sigmas) z = rng.standard_normal();
        // Rounding may not leave the closed support since |z| <= 4.
        return spec.a() + SimDuration{std::llround(z * static_cast<double>(spec.b().ns))};
    }
    }
    return {};
}

std::string to_string(const JitterSpec& spec)
{
    switch (spec.kind()) {
    case JitterSpec::Kind::none: return "none";
    case JitterSpec::Kind::uniform:
        return "uniform(" + std::to_string(spec.a().ns) + "," + std::to_string(spec.b().ns) + ")";
    case JitterSpec::Kind::normal:
        return "normal(" + std::to_string(spec.a().ns) + "," + std::to_string(spec.b().ns) + ")";
    }
    return "none";
}

Drift Drift::from_ppm(double ppm)
{
    if (!std::isfinite(ppm)) throw std::invalid_argument("drift must be finite");
    return {std::llround(ppm * 1e6)};
}

ClockModel::ClockModel(SimDuration initial_offset, Drift drift, SimDuration granularity, JitterSpec read_jitter,
                       double max_drift_ppm)
    : initial_offset_(initial_offset), drift_(drift), granularity_(granularity), read_jitter_(read_jitter)
{
    if (granularity_.ns < 1) throw std::invalid_argument("clock granularity must be >= 1 ns");
    if (std::abs(drift_.ppm()) > max_drift_ppm)
        throw std::invalid_argument("clock drift " + std::to_string(drift_.ppm()) + " ppm exceeds bound");
}

SimTime ClockModel::nominal(SimTime true_time) const
{
    const i128 t = true_time.ns;
    const i128 skew = floor_div128(t * drift_.ppt, ppt_denominator);
    return {static_cast<std::int64_t>(initial_offset_.ns + t + skew)};
}

SimTime ClockModel::true_time_of(SimTime local) const
{
    if (drift_.ppt <= -ppt_denominator) throw std::domain_error("clock does not advance");
    // Solve t + floor(t * k) >= local - offset for the least t.
    const i128 target = static_cast<i128>(local.ns) - initial_offset_.ns;
    const i128 rate = ppt_denominator + drift_.ppt;
    i128 t = floor_div128(target * ppt_denominator, rate);
    while (nominal({static_cast<std::int64_t>(t)}).ns < local.ns) ++t;
    while (nominal({static_cast<std::int64_t>(t - 1)}).ns >= local.ns) --t;
    return {static_cast<std::int64_t>(t)};
}

SimTime clock_read(const ClockModel& model, SimTime true_time, RngState& rng)
{
    SimTime raw = model.nominal(true_time);
    if (model.read_jitter().kind() != JitterSpec::Kind::none) raw += jitter_sample(model.read_jitter(), rng);
    return quantize(raw, model.granularity());
}

} // namespace rbissim
