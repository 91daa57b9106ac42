#include "rbissim/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace rbissim {

namespace {

constexpr std::array<UseCaseSpec, 3> use_cases{{
    {UseCaseClass::I, SimDuration::seconds(1), "10-100 ms", "remote control, monitoring"},
    {UseCaseClass::II, SimDuration::milliseconds(1), "1-10 ms", "mobile robotics, process control"},
    {UseCaseClass::III, SimDuration::microseconds(1), "<1 ms", "closed loop motion control"},
}};

// Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
double kolmogorov_q(double lambda)
{
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace

double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty series");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ErrorSummary summarize(std::span<const double> errors)
{
    if (errors.empty()) throw std::invalid_argument("cannot summarize an empty error series");
    std::vector<double> mags(errors.size());
    std::transform(errors.begin(), errors.end(), mags.begin(), [](double e) { return std::abs(e); });
    std::sort(mags.begin(), mags.end());

    ErrorSummary s;
    s.n = mags.size();
    s.min = mags.front();
    s.q1 = quantile_sorted(mags, 0.25);
    s.median = quantile_sorted(mags, 0.5);
    s.q3 = quantile_sorted(mags, 0.75);
    s.p99 = quantile_sorted(mags, 0.99);
    s.max = mags.back();
    return s;
}

ErrorSummary summarize(std::span<const SimDuration> errors)
{
    std::vector<double> ns(errors.size());
    std::transform(errors.begin(), errors.end(), ns.begin(), [](SimDuration d) { return static_cast<double>(d.ns); });
    return summarize(ns);
}

const UseCaseSpec& use_case(UseCaseClass c) { return use_cases.at(static_cast<std::size_t>(c)); }

std::string_view to_string(UseCaseClass c)
{
    switch (c) {
    case UseCaseClass::I: return "I";
    case UseCaseClass::II: return "II";
    case UseCaseClass::III: return "III";
    }
    return "?";
}

UseCaseClass parse_use_case(std::string_view text)
{
    if (text == "I") return UseCaseClass::I;
    if (text == "II") return UseCaseClass::II;
    if (text == "III") return UseCaseClass::III;
    throw std::invalid_argument("unknown use-case class '" + std::string(text) + "'");
}

bool classify(const ErrorSummary& summary_ns, UseCaseClass c, Criterion criterion)
{
    const double stat = criterion == Criterion::median ? summary_ns.median : summary_ns.max;
    return stat <= static_cast<double>(use_case(c).sync_limit.ns);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs two nonempty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());

    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double en = std::sqrt(n * m / (n + m));
    return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

std::vector<SimDuration> extract_errors(const TraceLog& trace, std::string_view node)
{
    std::vector<SimDuration> out;
    for (const auto& r : trace.records()) {
        if (r.kind != trace_kind::sync_error) continue;
        if (!node.empty() && r.node != node) continue;
        out.push_back({r.int_field("error_ns")});
    }
    return out;
}

} // namespace rbissim
