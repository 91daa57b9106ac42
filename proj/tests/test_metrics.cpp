#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rbissim/metrics.hpp"
#include "rbissim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace rbissim;

namespace {

// Type-7 quantile with 1-based rank r = 1 + (n - 1) p.
double oracle_quantile(std::vector<double> v, double p)
{
    std::sort(v.begin(), v.end());
    const double r = 1.0 + (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(r);
    const double frac = r - static_cast<double>(lo);
    if (lo >= v.size()) return v.back();
    return v[lo - 1] + frac * (v[lo] - v[lo - 1]);
}

ErrorSummary summary_with(double median, double max)
{
    ErrorSummary s;
    s.n = 3;
    s.median = median;
    s.max = max;
    return s;
}

} // namespace

TEST_CASE("summary of a small series")
{
    const std::vector<SimDuration> e{5_us, -1_us, 3_us};
    const ErrorSummary s = summarize(e);
    CHECK(s.n == 3);
    CHECK(s.median == 3000.0);
    CHECK(s.max == 5000.0);
    CHECK(s.min == 1000.0);
}

TEST_CASE("a single element fills every field with its magnitude")
{
    const std::vector<double> one{-42.0};
    const ErrorSummary s = summarize(one);
    CHECK(s == ErrorSummary{1, 42, 42, 42, 42, 42, 42});
}

TEST_CASE("linear interpolation between order statistics")
{
    const std::vector<double> v{4, 1, 3, 2};
    const ErrorSummary s = summarize(v);
    CHECK(s.q1 == 1.75);
    CHECK(s.median == 2.5);
    CHECK(s.q3 == 3.25);
    CHECK(s.p99 == doctest::Approx(3.97));
    CHECK_THROWS_AS(summarize(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("summaries agree with a sort-based oracle on a large run")
{
    RngState rng(99);
    std::vector<double> errs(100'000);
    for (auto& x : errs) x = static_cast<double>(rng.uniform_int(-50'000, 50'000));
    std::vector<double> mags(errs.size());
    std::transform(errs.begin(), errs.end(), mags.begin(), [](double x) { return std::abs(x); });

    const ErrorSummary s = summarize(errs);
    CHECK(s.n == 100'000);
    CHECK(s.min == *std::min_element(mags.begin(), mags.end()));
    CHECK(s.max == *std::max_element(mags.begin(), mags.end()));
    CHECK(s.q1 == oracle_quantile(mags, 0.25));
    CHECK(s.median == oracle_quantile(mags, 0.5));
    CHECK(s.q3 == oracle_quantile(mags, 0.75));
    CHECK(s.p99 == oracle_quantile(mags, 0.99));
}

TEST_CASE("use-case classes")
{
    CHECK(use_case(UseCaseClass::I).sync_limit == 1_s);
    CHECK(use_case(UseCaseClass::II).sync_limit == 1_ms);
    CHECK(use_case(UseCaseClass::III).sync_limit == 1_us);
    CHECK(parse_use_case("II") == UseCaseClass::II);
    CHECK(to_string(UseCaseClass::III) == "III");
    CHECK_THROWS_AS(parse_use_case("IV"), std::invalid_argument);
}

TEST_CASE("classification against the class limits")
{
    CHECK(classify(summary_with(12'000, 40'000), UseCaseClass::II, Criterion::max));
    CHECK_FALSE(classify(summary_with(950'000, 3'500'000), UseCaseClass::II, Criterion::max));
    CHECK(classify(summary_with(950'000, 3'500'000), UseCaseClass::II, Criterion::median));
    CHECK(classify(summary_with(52, 254), UseCaseClass::III, Criterion::max));
    CHECK(classify(summary_with(1'000, 1'000), UseCaseClass::III, Criterion::max));
    CHECK_FALSE(classify(summary_with(1'000, 1'001), UseCaseClass::III, Criterion::max));
}

TEST_CASE("classification on max is monotone in added errors")
{
    RngState rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v;
        bool was_pass = true;
        for (int k = 0; k < 50; ++k) {
            v.push_back(static_cast<double>(rng.uniform_int(-1'200'000, 1'200'000)));
            const bool pass = classify(summarize(v), UseCaseClass::II, Criterion::max);
            REQUIRE_FALSE((pass && !was_pass));
            was_pass = pass;
        }
    }
}

TEST_CASE("two-sample KS test")
{
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{4, 5, 6};
    CHECK(ks_two_sample(a, b).statistic == 1.0);
    CHECK(ks_two_sample(a, a).statistic == 0.0);
    CHECK(ks_two_sample(a, a).p_value == 1.0);

    RngState rng(6);
    std::vector<double> x(5000);
    std::vector<double> y(5000);
    std::vector<double> z(5000);
    for (auto& v : x) v = rng.uniform01();
    for (auto& v : y) v = rng.uniform01();
    for (auto& v : z) v = rng.uniform01() + 0.1;
    CHECK(ks_two_sample(x, y).p_value > 0.01);
    CHECK(ks_two_sample(x, z).p_value < 1e-10);
    CHECK_THROWS_AS(ks_two_sample(a, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("error samples are read back from a trace")
{
    TraceLog log;
    log.append(SimTime{1}, trace_kind::sync_error, "sta2", {kv("error_ns", -5)});
    log.append(SimTime{2}, trace_kind::offset, "sta2", {kv("offset_ns", 9)});
    log.append(SimTime{3}, trace_kind::sync_error, "sta3", {kv("error_ns", 7)});
    CHECK(extract_errors(log) == std::vector<SimDuration>{SimDuration{-5}, SimDuration{7}});
    CHECK(extract_errors(log, "sta3") == std::vector<SimDuration>{SimDuration{7}});

    std::stringstream buf;
    log.write(buf);
    CHECK(TraceLog::read(buf) == log);
}
