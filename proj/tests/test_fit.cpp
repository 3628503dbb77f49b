#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bubbleforge/mc.hpp"
#include "bubbleforge/scaling_fit.hpp"

using namespace bubbleforge;

TEST_CASE("exact power law recovered to machine precision") {
    std::vector<std::array<double, 2>> samples;
    for (double lam : {10.0, 20.0, 40.0, 80.0}) samples.push_back({lam, 3.7 * std::pow(lam, -2.5)});
    const ScalingFit fit = fit_power_law(samples);
    CHECK(fit.exponent == doctest::Approx(-2.5).epsilon(1e-12));
    CHECK(fit.constant == doctest::Approx(3.7).epsilon(1e-12));
    CHECK(fit.maxRelDev <= 1e-12);
    CHECK(fit.window[0] == 10.0);
    CHECK(fit.window[1] == 80.0);
}

TEST_CASE("one percent multiplicative noise keeps the exponent within 0.05") {
    Rng rng(20260810);
    std::vector<std::array<double, 2>> samples;
    for (double lam : {10.0, 20.0, 40.0, 80.0})
        samples.push_back({lam, 3.7 * std::pow(lam, -2.5) * (1.0 + 0.01 * (2.0 * rng.uniform() - 1.0))});
    const ScalingFit fit = fit_power_law(samples);
    CHECK(std::abs(fit.exponent + 2.5) <= 0.05);
}

TEST_CASE("flat law fits zero exponent") {
    std::vector<std::array<double, 2>> samples;
    for (double lam : {1.0, 2.0, 4.0, 8.0}) samples.push_back({lam, 5.5});
    const ScalingFit fit = fit_power_law(samples);
    CHECK(fit.exponent == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(fit.constant == doctest::Approx(5.5).epsilon(1e-13));
}

TEST_CASE("negative-valued laws carry the sign in the constant") {
    std::vector<std::array<double, 2>> samples;
    for (double lam : {1.0, 2.0, 4.0, 8.0}) samples.push_back({lam, -2.0 * std::pow(lam, 1.5)});
    const ScalingFit fit = fit_power_law(samples);
    CHECK(fit.sign == -1);
    CHECK(fit.constant == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("precondition violations are rejected") {
    CHECK_THROWS(fit_power_law({{1.0, 1.0}, {2.0, -1.0}}));          // mixed signs
    CHECK_THROWS(fit_power_law({{-1.0, 1.0}, {2.0, 1.0}}));          // nonpositive abscissa
    CHECK_THROWS(fit_power_law({{2.0, 1.0}, {1.0, 1.0}}));           // not increasing
    CHECK_THROWS(fit_power_law({{1.0, 0.0}, {2.0, 0.0}}));           // zero values
    CHECK_THROWS(fit_power_law(std::vector<std::array<double, 2>>{{1.0, 1.0}}));
}
