#pragma once

#include "rbissim/rng.hpp"
#include "rbissim/time.hpp"

#include <cstdint>
#include <string>

namespace rbissim {

/// Distribution of an additive timing noise term.
///
/// Constructed through the named factories, which validate their
/// parameters. `none` always samples exactly zero; `normal` is truncated at
/// four standard deviations around its mean by resampling.
class JitterSpec {
public:
    enum class Kind { none, uniform, normal };

    JitterSpec() = default;

    static JitterSpec none() { return {}; }
    static JitterSpec uniform(SimDuration lo, SimDuration hi);
    static JitterSpec normal(SimDuration mean, SimDuration sigma);

    Kind kind() const { return kind_; }
    /// uniform: lower bound; normal: mean.
    SimDuration a() const { return a_; }
    /// uniform: upper bound; normal: sigma.
    SimDuration b() const { return b_; }

    /// Smallest and largest value `jitter_sample` can return.
    SimDuration support_min() const;
    SimDuration support_max() const;

    bool operator==(const JitterSpec&) const = default;

private:
    Kind kind_ = Kind::none;
    SimDuration a_{};
    SimDuration b_{};
};

SimDuration jitter_sample(const JitterSpec& spec, RngState& rng);

std::string to_string(const JitterSpec& spec);

/// Clock frequency error as a rational number with a fixed denominator of
/// 10^12 (parts per trillion). One ppm is 10^6 ppt.
struct Drift {
    std::int64_t ppt = 0;

    static Drift from_ppm(double ppm);
    double ppm() const { return static_cast<double>(ppt) / 1e6; }

    bool operator==(const Drift&) const = default;
};

/// Sanity bound on |drift| accepted by ClockModel.
inline constexpr double default_max_drift_ppm = 1000.0;

/// A free-running local oscillator.
///
/// reading(t) = floor_g(initial_offset + t + floor(t * drift) + jitter)
class ClockModel {
public:
    ClockModel() = default;
    ClockModel(SimDuration initial_offset, Drift drift, SimDuration granularity, JitterSpec read_jitter,
               double max_drift_ppm = default_max_drift_ppm);

    static ClockModel ideal() { return {}; }

    SimDuration initial_offset() const { return initial_offset_; }
    Drift drift() const { return drift_; }
    SimDuration granularity() const { return granularity_; }
    const JitterSpec& read_jitter() const { return read_jitter_; }

    /// Reading without jitter or quantization.
    SimTime nominal(SimTime true_time) const;

    /// Earliest true time at which the nominal reading reaches `local`.
    /// Requires drift > -10^6 ppm.
    SimTime true_time_of(SimTime local) const;

    bool operator==(const ClockModel&) const = default;

private:
    SimDuration initial_offset_{};
    Drift drift_{};
    SimDuration granularity_{1};
    JitterSpec read_jitter_{};
};

/// Reads the clock at `true_time`. Advances `rng` only when the model has
/// read jitter.
SimTime clock_read(const ClockModel& model, SimTime true_time, RngState& rng);

/// Floor quantization to a multiple of `granularity`.
constexpr SimTime quantize(SimTime t, SimDuration granularity)
{
    return {floor_div(t.ns, granularity.ns) * granularity.ns};
}

} // namespace rbissim
