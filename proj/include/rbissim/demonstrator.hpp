#pragma once

#include "rbissim/rng.hpp"
#include "rbissim/time.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace rbissim {

/// Point-to-point move of one carriage. Positions in m, speed in m/s,
/// acceleration in m/s^2.
struct MotionProfile {
    double p1 = 0.0;
    double p2 = 2.0;
    double v_max = 4.0;
    double a_max = 30.0;

    /// Throws std::invalid_argument unless v_max > 0 and a_max > 0.
    void validate() const;

    /// Duration of the whole move. Triangular when the distance is too
    /// short to reach v_max.
    double total_time() const;
    double peak_speed() const;

    bool operator==(const MotionProfile&) const = default;
};

/// Position dt seconds after the trigger of a trapezoidal move. Holds p1 for
/// dt <= 0 and p2 once the move has finished.
double motion_position(const MotionProfile& profile, double dt);

/// Position sensor: a position-dependent resolution band interpolated
/// linearly from resolution_at_p1 to resolution_at_p2 along the axis, plus
/// rounding to an n-bit grid over the axis span.
struct SensorModel {
    double resolution_at_p1 = 3e-6;
    double resolution_at_p2 = 63e-6;
    int adc_bits = 12;
    double axis_min = 0.0;
    double axis_span = 2.0;

    double resolution(double position) const;
    double quantum() const;
    /// Largest possible |measured - true| at `position`.
    double error_bound(double position) const;
    double measure(double position, RngState& rng) const;

    bool operator==(const SensorModel&) const = default;
};

struct CarriageRun {
    MotionProfile profile;
    /// True time at which the carriage's controller started the move.
    SimTime trigger_true_time;

    double position_at(SimTime t) const;
    SimTime completion_time() const;
};

/// s1(t) - s2(t); with a sensor, each position is measured independently.
double delta_s(const CarriageRun& run1, const CarriageRun& run2, SimTime t, const SensorModel* sensor = nullptr,
               RngState* rng = nullptr);

/// Δt_max = Δs_max / v_max. Throws std::invalid_argument for v_max <= 0.
double infer_time_offset(double delta_s_max, double v_max);

struct PositionSample {
    SimTime t;
    double s1;
    double s2;
    double delta;
};

struct DemoOutcome {
    SimDuration trigger_skew; ///< trigger1 - trigger2
    double delta_s_max = 0.0; ///< max |Δs| over the sampled window
    double inferred_time_offset = 0.0;
    std::vector<PositionSample> series;
};

/// Samples both carriages every `sample_period` from the first trigger to
/// the last completion (inclusive) and reports the largest |Δs|.
DemoOutcome evaluate_carriages(const CarriageRun& run1, const CarriageRun& run2, SimDuration sample_period,
                               const SensorModel* sensor = nullptr, RngState* rng = nullptr);

} // namespace rbissim
