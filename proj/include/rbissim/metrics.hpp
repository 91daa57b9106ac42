#pragma once

#include "rbissim/time.hpp"
#include "rbissim/trace.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rbissim {

/// Order statistics of |error|. Values are in the unit of the input series
/// (ns for time errors, m for position offsets). Quartiles use linear
/// interpolation between order statistics (Hyndman-Fan type 7).
struct ErrorSummary {
    std::size_t n = 0;
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double p99 = 0;
    double max = 0;

    bool operator==(const ErrorSummary&) const = default;
};

/// Type-7 quantile of an ascending-sorted, nonempty series.
double quantile_sorted(std::span<const double> sorted, double p);

/// Throws std::invalid_argument for an empty series.
ErrorSummary summarize(std::span<const double> errors);
ErrorSummary summarize(std::span<const SimDuration> errors);

enum class UseCaseClass { I, II, III };

struct UseCaseSpec {
    UseCaseClass id;
    SimDuration sync_limit;
    std::string_view latency_range;
    std::string_view examples;
};

const UseCaseSpec& use_case(UseCaseClass c);
std::string_view to_string(UseCaseClass c);
UseCaseClass parse_use_case(std::string_view text);

enum class Criterion { median, max };

/// Pass iff the chosen statistic (ns) is at most the class limit.
bool classify(const ErrorSummary& summary_ns, UseCaseClass c, Criterion criterion);

struct KsResult {
    double statistic = 0; ///< sup |F1 - F2|
    double p_value = 1;   ///< asymptotic Kolmogorov distribution
};

/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// sync_error samples of a trace, optionally restricted to one node.
std::vector<SimDuration> extract_errors(const TraceLog& trace, std::string_view node = {});

} // namespace rbissim
