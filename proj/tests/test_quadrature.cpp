#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bubbleforge/lemma_integrals.hpp"
#include "bubbleforge/scaling_fit.hpp"

using namespace bubbleforge;

namespace {

Vec unit(int n, int axis, double v) {
    Vec x = Vec::Zero(n);
    x[axis] = v;
    return x;
}

const Dimension dim6(6);
const QuadratureSpec spec{};

}  // namespace

TEST_CASE("gauss rule integrates polynomials exactly") {
    const auto& r = quad::gauss_legendre(8);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += r.w[i] * std::pow(r.x[i], 14);
    CHECK(s == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
    CHECK(quad::on_interval([](double x) { return x * x * x; }, 0.0, 2.0, 12) ==
          doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("radial engine: Beta identity, odd identity, Gaussian moment") {
    const auto beta = integrate_radial(
        [](double r) { return std::pow(1.0 + r * r, -6.0); }, dim6, spec);
    CHECK(beta.converged);
    CHECK(beta.value == doctest::Approx(1.0 / 60.0).epsilon(1e-10));

    // forced by lambda invariance of int U^{2*}
    const auto zero = integrate_radial(
        [](double r) { return (1.0 - r * r) * std::pow(1.0 + r * r, -7.0); }, dim6, spec);
    CHECK(std::abs(zero.value) <= 1e-12);

    const auto gauss = integrate_radial([](double r) { return std::exp(-r * r); }, dim6, spec);
    CHECK(gauss.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("radial engine flags non-convergence against relTol") {
    QuadratureSpec tight = spec;
    tight.radialNodes = 8;
    tight.relTol = 1e-15;
    const auto r = integrate_radial([](double x) { return std::exp(-x * x); }, dim6, tight);
    CHECK_FALSE(r.converged);
    CHECK(r.refineDelta > 1e-15);
}

TEST_CASE("validation of the quadrature spec") {
    QuadratureSpec bad = spec;
    bad.radialNodes = 4;
    CHECK_THROWS(bad.validate());
    bad = spec;
    bad.relTol = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("sphere moments: closed form vs frozen Monte Carlo oracle") {
    CHECK(sphere_moment(dim6, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sphere_moment(dim6, 2.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(sphere_moment(Dimension(5), 2.0) == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(sphere_moment(dim6, 1.5) == doctest::Approx(0.23123861).epsilon(1e-7));
    CHECK_THROWS(sphere_moment(dim6, -1.0));

    // 3e7-sample Monte Carlo oracle values, frozen; agreement to 4 significant digits
    struct Row {
        int n;
        double beta, mc;
    };
    const Row rows[] = {{5, 0.5, 0.57148246}, {5, 1.5, 0.26666020}, {5, 2.5, 0.15584750},
                        {6, 0.5, 0.54239475}, {6, 1.5, 0.23121439}, {6, 2.5, 0.12519995},
                        {8, 0.5, 0.50066922}, {8, 1.5, 0.18501290}, {8, 2.5, 0.08837164}};
    for (const auto& row : rows) {
        const double cf = sphere_moment(Dimension(row.n), row.beta);
        CHECK(std::abs(cf - row.mc) / cf <= 5e-4);
    }
}

TEST_CASE("two-center engine: Gaussian identity and coincident fallback") {
    const Vec c1 = Vec::Zero(6), c2 = unit(6, 0, 1.0);
    const auto g = integrate_two_center(
        [](double r1, double r2) { return std::exp(-r1 * r1 - r2 * r2); }, c1, c2, dim6, spec);
    const double exact = std::pow(M_PI, 3.0) / 8.0 * std::exp(-0.5);
    CHECK(g.converged);
    CHECK(g.value == doctest::Approx(exact).epsilon(1e-8));

    // coincident centers: f(r, r) = U^{2*} integrates to A
    Bubble b(c1, 1.0);
    const auto a = integrate_two_center(
        [&](double r1, double r2) {
            return std::pow(bubble_value(dim6, b, unit(6, 0, r1)), dim6.p()) *
                   bubble_value(dim6, b, unit(6, 0, r2));
        },
        c1, c1, dim6, spec);
    const double A = std::pow(dim6.cN, 6.0) * sphere_area(6) * 0.5 * beta_fn(3.0, 3.0);
    CHECK(a.value == doctest::Approx(A).epsilon(1e-8));
}

TEST_CASE("two-center far field decays like the bubble tail") {
    Bubble b(Vec::Zero(6), 1.0);
    std::vector<std::array<double, 2>> samples;
    for (double d : {5.0, 10.0, 20.0, 40.0}) {
        const double val = interaction_integral(dim6, 1.0, 1.0, d, spec);
        CHECK(val > 0.0);
        samples.push_back({d, val});
    }
    const ScalingFit fit = fit_power_law(samples);
    CHECK(std::abs(fit.exponent + (dim6.n - 4.0)) <= 0.05);
}

TEST_CASE("two-center determinism and mesh consistency") {
    const Vec c1 = Vec::Zero(6), c2 = unit(6, 0, 2.0);
    auto f = [](double r1, double r2) {
        return std::pow(1.0 + r1 * r1, -4.0) * std::pow(1.0 + r2 * r2, -3.0);
    };
    const auto v1 = integrate_two_center(f, c1, c2, dim6, spec);
    const auto v2 = integrate_two_center(f, c1, c2, dim6, spec);
    CHECK(v1.value == v2.value);  // bit identical
    CHECK(v1.converged);
    CHECK(v1.refineDelta <= spec.relTol);
}

TEST_CASE("monte carlo: normalization, mass, parity, determinism") {
    Bubble b1(Vec::Zero(6), 1.0), b2(unit(6, 0, 1.0), 1.0);
    BubbleMixture mix(dim6, b1, b2);
    const double A = std::pow(dim6.cN, 6.0) * sphere_area(6) * 0.5 * beta_fn(3.0, 3.0);

    QuadratureSpec mc = spec;
    mc.mcSamples = 400000;

    // int U1^{2*} = A
    const McResult rA = integrate_mc(
        [&](const Vec& x) { return std::pow(bubble_value(dim6, b1, x), 6.0); }, dim6, mc, mix);
    CHECK(std::abs(rA.value - A) <= 3.0 * rA.stderr_);

    // self-normalization: the first component density integrates to one
    const McResult r1 = integrate_mc(
        [&](const Vec& x) { return std::pow(bubble_value(dim6, b1, x), 6.0) / A; }, dim6, mc, mix);
    CHECK(std::abs(r1.value - 1.0) <= 3.0 * std::max(r1.stderr_, 1e-12));

    // odd about the midpoint: cancels exactly in antithetic pairs
    const Vec mid = mix.midpoint();
    const McResult rOdd = integrate_mc(
        [&](const Vec& x) {
            return (x[1] - mid[1]) * std::pow(bubble_value(dim6, b1, x), 5.0);
        },
        dim6, mc, mix);
    CHECK(std::abs(rOdd.value) <= 3.0 * std::max(rOdd.stderr_, 1e-14));

    const McResult again = integrate_mc(
        [&](const Vec& x) { return std::pow(bubble_value(dim6, b1, x), 6.0); }, dim6, mc, mix);
    CHECK(again.value == rA.value);
}

TEST_CASE("cross-engine agreement on an axially symmetric integrand") {
    Bubble b1(Vec::Zero(6), 1.0), b2(unit(6, 0, 1.0), 1.0);
    BubbleMixture mix(dim6, b1, b2);
    QuadratureSpec mc = spec;
    mc.mcSamples = 400000;
    const McResult r = integrate_mc(
        [&](const Vec& x) {
            return std::pow(bubble_value(dim6, b1, x), 5.0) * bubble_value(dim6, b2, x);
        },
        dim6, mc, mix);
    const double det = interaction_integral(dim6, 1.0, 1.0, 1.0, spec);
    CHECK(std::abs(r.value - det) <= 3.0 * r.stderr_);
}

TEST_CASE("radial mapScale adapts concentrated integrands") {
    QuadratureSpec local = spec;
    local.mapScale = 1.0 / 50.0;
    Bubble b(Vec::Zero(6), 50.0);
    const auto r = integrate_radial(
        [&](double rr) { return std::pow(bubble_value(dim6, b, unit(6, 0, rr)), 6.0); }, dim6,
        local);
    const double A = std::pow(dim6.cN, 6.0) * sphere_area(6) * 0.5 * beta_fn(3.0, 3.0);
    CHECK(sphere_area(6) * r.value == doctest::Approx(A).epsilon(1e-9));
}
