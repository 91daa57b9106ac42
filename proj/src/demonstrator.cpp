#include "rbissim/demonstrator.hpp"

#include <algorithm>
#include <cmath>

namespace rbissim {

namespace {

double seconds_between(SimTime a, SimTime b) { return static_cast<double>((a - b).ns) * 1e-9; }

} // namespace

void MotionProfile::validate() const
{
    if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
    if (!(a_max > 0.0)) throw std::invalid_argument("a_max must be positive");
}

double MotionProfile::peak_speed() const
{
    const double distance = std::abs(p2 - p1);
    return std::min(v_max, std::sqrt(distance * a_max));
}

double MotionProfile::total_time() const
{
    validate();
    const double distance = std::abs(p2 - p1);
    const double v = peak_speed();
    if (v <= 0.0) return 0.0;
    const double ramp_time = v / a_max;
    const double ramp_distance = v * v / a_max; // both ramps
    return 2.0 * ramp_time + (distance - ramp_distance) / v;
}

double motion_position(const MotionProfile& profile, double dt)
{
    profile.validate();
    if (dt <= 0.0) return profile.p1;
    const double distance = std::abs(profile.p2 - profile.p1);
    const double dir = profile.p2 >= profile.p1 ? 1.0 : -1.0;
    const double v = profile.peak_speed();
    const double a = profile.a_max;
    const double t_ramp = v / a;
    const double total = profile.total_time();
    if (dt >= total) return profile.p2;

    double travelled;
    if (dt < t_ramp) {
        travelled = 0.5 * a * dt * dt;
    }
    else if (dt <= total - t_ramp) {
        travelled = 0.5 * v * t_ramp + v * (dt - t_ramp);
    }
    else {
        const double remaining = total - dt;
        travelled = distance - 0.5 * a * remaining * remaining;
    }
    return profile.p1 + dir * travelled;
}

double SensorModel::resolution(double position) const
{
    const double x = std::clamp((position - axis_min) / axis_span, 0.0, 1.0);
    return resolution_at_p1 + (resolution_at_p2 - resolution_at_p1) * x;
}

double SensorModel::quantum() const { return axis_span / std::ldexp(1.0, adc_bits); }

double SensorModel::error_bound(double position) const { return resolution(position) + 0.5 * quantum(); }

double SensorModel::measure(double position, RngState& rng) const
{
    const double res = resolution(position);
    const double noisy = position + (2.0 * rng.uniform01() - 1.0) * res;
    const double q = quantum();
    return axis_min + std::round((noisy - axis_min) / q) * q;
}

double CarriageRun::position_at(SimTime t) const
{
    return motion_position(profile, seconds_between(t, trigger_true_time));
}

SimTime CarriageRun::completion_time() const
{
    return trigger_true_time + SimDuration{static_cast<std::int64_t>(std::ceil(profile.total_time() * 1e9))};
}

double delta_s(const CarriageRun& run1, const CarriageRun& run2, SimTime t, const SensorModel* sensor, RngState* rng)
{
    double s1 = run1.position_at(t);
    double s2 = run2.position_at(t);
    if (sensor) {
        if (!rng) throw std::invalid_argument("sensor noise needs an RNG");
        s1 = sensor->measure(s1, *rng);
        s2 = sensor->measure(s2, *rng);
    }
    return s1 - s2;
}

double infer_time_offset(double delta_s_max, double v_max)
{
    if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
    return delta_s_max / v_max;
}

DemoOutcome evaluate_carriages(const CarriageRun& run1, const CarriageRun& run2, SimDuration sample_period,
                               const SensorModel* sensor, RngState* rng)
{
    if (sample_period.ns <= 0) throw std::invalid_argument("sample period must be positive");
    DemoOutcome out;
    out.trigger_skew = run1.trigger_true_time - run2.trigger_true_time;
    const SimTime begin = std::min(run1.trigger_true_time, run2.trigger_true_time);
    const SimTime end = std::max(run1.completion_time(), run2.completion_time());
    for (SimTime t = begin; t <= end + sample_period; t += sample_period) {
        double s1 = run1.position_at(t);
        double s2 = run2.position_at(t);
        if (sensor) {
            if (!rng) throw std::invalid_argument("sensor noise needs an RNG");
            s1 = sensor->measure(s1, *rng);
            s2 = sensor->measure(s2, *rng);
        }
        const double d = s1 - s2;
        out.series.push_back({t, s1, s2, d});
        out.delta_s_max = std::max(out.delta_s_max, std::abs(d));
    }
    out.inferred_time_offset = infer_time_offset(out.delta_s_max, run1.profile.v_max);
    return out;
}

} // namespace rbissim
