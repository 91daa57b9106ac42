#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace rbissim {

/// Signed span of simulated time in integer nanoseconds.
struct SimDuration {
    std::int64_t ns = 0;

    static constexpr SimDuration nanoseconds(std::int64_t v) { return {v}; }
    static constexpr SimDuration microseconds(std::int64_t v) { return {v * 1'000}; }
    static constexpr SimDuration milliseconds(std::int64_t v) { return {v * 1'000'000}; }
    static constexpr SimDuration seconds(std::int64_t v) { return {v * 1'000'000'000}; }

    constexpr auto operator<=>(const SimDuration&) const = default;

    constexpr SimDuration operator-() const { return {-ns}; }
    constexpr SimDuration& operator+=(SimDuration o) { ns += o.ns; return *this; }
    constexpr SimDuration& operator-=(SimDuration o) { ns -= o.ns; return *this; }
};

constexpr SimDuration operator+(SimDuration a, SimDuration b) { return {a.ns + b.ns}; }
constexpr SimDuration operator-(SimDuration a, SimDuration b) { return {a.ns - b.ns}; }
constexpr SimDuration operator*(SimDuration a, std::int64_t k) { return {a.ns * k}; }
constexpr SimDuration operator*(std::int64_t k, SimDuration a) { return {a.ns * k}; }

constexpr SimDuration abs(SimDuration d) { return {d.ns < 0 ? -d.ns : d.ns}; }

/// Point in simulated time, nanoseconds since the scenario epoch.
/// Also used for readings of local clocks, which share the same unit.
struct SimTime {
    std::int64_t ns = 0;

    static constexpr SimTime from_ns(std::int64_t v) { return {v}; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime& operator+=(SimDuration d) { ns += d.ns; return *this; }
    constexpr SimTime& operator-=(SimDuration d) { ns -= d.ns; return *this; }
    constexpr SimDuration since_epoch() const { return {ns}; }
};

constexpr SimTime operator+(SimTime t, SimDuration d) { return {t.ns + d.ns}; }
constexpr SimTime operator+(SimDuration d, SimTime t) { return {t.ns + d.ns}; }
constexpr SimTime operator-(SimTime t, SimDuration d) { return {t.ns - d.ns}; }
constexpr SimDuration operator-(SimTime a, SimTime b) { return {a.ns - b.ns}; }

/// Floor division that rounds toward negative infinity for any sign.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// 1 TU = 1024 µs.
constexpr SimDuration time_units(std::int64_t tu) { return SimDuration::microseconds(tu * 1024); }

std::string to_string(SimDuration d);
std::string to_string(SimTime t);

inline namespace literals {
constexpr SimDuration operator""_ns(unsigned long long v) { return SimDuration::nanoseconds(static_cast<std::int64_t>(v)); }
constexpr SimDuration operator""_us(unsigned long long v) { return SimDuration::microseconds(static_cast<std::int64_t>(v)); }
constexpr SimDuration operator""_ms(unsigned long long v) { return SimDuration::milliseconds(static_cast<std::int64_t>(v)); }
constexpr SimDuration operator""_s(unsigned long long v) { return SimDuration::seconds(static_cast<std::int64_t>(v)); }
} // namespace literals

} // namespace rbissim
