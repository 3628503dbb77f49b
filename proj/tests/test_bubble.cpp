#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bubbleforge/ansatz.hpp"
#include "bubbleforge/kprofile.hpp"
#include "bubbleforge/mc.hpp"

using namespace bubbleforge;

namespace {

Vec unit(int n, int axis, double v) {
    Vec x = Vec::Zero(n);
    x[axis] = v;
    return x;
}

}  // namespace

TEST_CASE("dimension invariants") {
    CHECK_THROWS(Dimension(4));
    const Dimension d6(6);
    CHECK(d6.twoStar == doctest::Approx(6.0));
    CHECK(d6.cN == doctest::Approx(std::pow(384.0, 0.25)).epsilon(1e-14));
    CHECK(d6.cN == doctest::Approx(4.426727678801286).epsilon(1e-12));
    CHECK(Dimension(5).twoStar == doctest::Approx(10.0));
    CHECK_FALSE(Dimension(5).pipelineAdmissible());
    CHECK(Dimension(6).pipelineAdmissible());
}

TEST_CASE("bubble closed-form values") {
    const Dimension dim(6);
    const double C6 = dim.cN;
    Bubble b1(Vec::Zero(6), 1.0);
    CHECK(bubble_value(dim, b1, Vec::Zero(6)) == doctest::Approx(C6).epsilon(1e-14));
    CHECK(bubble_value(dim, b1, unit(6, 0, 1.0)) == doctest::Approx(C6 / 2.0).epsilon(1e-14));
    Bubble b2(Vec::Zero(6), 2.0);
    CHECK(bubble_value(dim, b2, Vec::Zero(6)) == doctest::Approx(2.0 * C6).epsilon(1e-14));
    CHECK_THROWS(Bubble(Vec::Zero(6), 0.0));
    CHECK_THROWS(Bubble(Vec::Zero(6), -1.0));
}

TEST_CASE("scale covariance") {
    const Dimension dim(6);
    Rng seeds = Rng(123);
    for (double lam : {0.5, 3.0, 40.0}) {
        Bubble b(Vec::Zero(6), lam);
        Bubble ref(Vec::Zero(6), 1.0);
        for (int s = 0; s < 20; ++s) {
            Vec x(6);
            for (int i = 0; i < 6; ++i) x[i] = 2.0 * seeds.uniform() - 1.0;
            const double lhs = bubble_value(dim, b, x);
            const double rhs = std::pow(lam, dim.m()) * bubble_value(dim, ref, (lam * x).eval());
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("scale gradient closed form and finite differences") {
    const Dimension dim(6);
    Bubble b(Vec::Zero(6), 2.0);
    // at the center the log-derivative of lambda^{(n-4)/2} survives
    CHECK(bubble_grad_scale(dim, b, Vec::Zero(6)) == doctest::Approx(dim.cN).epsilon(1e-13));
    // zero at lambda r = 1
    CHECK(bubble_grad_scale(dim, b, unit(6, 2, 0.5)) == doctest::Approx(0.0).epsilon(1e-15));

    // central finite differences with observed order >= 1.9
    Vec x(6);
    x << 0.3, -0.2, 0.1, 0.0, 0.7, -0.4;
    auto fd = [&](double h) {
        Bubble bp(Vec::Zero(6), 2.0 + h), bm(Vec::Zero(6), 2.0 - h);
        return (bubble_value(dim, bp, x) - bubble_value(dim, bm, x)) / (2.0 * h);
    };
    const double exact = bubble_grad_scale(dim, b, x);
    const double e1 = std::abs(fd(1e-2) - exact);
    const double e2 = std::abs(fd(5e-3) - exact);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.9);
}

TEST_CASE("center gradient closed form, parity, finite differences") {
    const Dimension dim(6);
    Bubble b(Vec::Zero(6), 1.5);
    CHECK(bubble_grad_center(dim, b, Vec::Zero(6), 0) == doctest::Approx(0.0));
    CHECK_THROWS(bubble_grad_center(dim, b, Vec::Zero(6), 6));

    Vec x(6);
    x << 0.4, -0.1, 0.2, 0.5, 0.0, -0.3;
    for (int i = 0; i < 6; ++i) {
        const Vec xr = -x;  // reflection about the center flips every component
        CHECK(bubble_grad_center(dim, b, x, i) ==
              doctest::Approx(-bubble_grad_center(dim, b, xr, i)).epsilon(1e-13));
        auto fd = [&](double h) {
            Vec yp = Vec::Zero(6), ym = Vec::Zero(6);
            yp[i] += h;
            ym[i] -= h;
            return (bubble_value(dim, Bubble(yp, 1.5), x) - bubble_value(dim, Bubble(ym, 1.5), x)) /
                   (2.0 * h);
        };
        const double exact = bubble_grad_center(dim, b, x, i);
        const double e1 = std::abs(fd(1e-2) - exact);
        const double e2 = std::abs(fd(5e-3) - exact);
        if (e2 > 1e-14) CHECK(std::log2(e1 / e2) >= 1.9);
    }
}

TEST_CASE("second derivatives match finite differences") {
    const Dimension dim(6);
    Vec x(6);
    x << 0.4, -0.1, 0.2, 0.5, 0.0, -0.3;
    const double lam = 1.7;
    Bubble b(Vec::Zero(6), lam);
    const double h = 1e-4;

    auto dl = [&](double l) { return bubble_grad_scale(dim, Bubble(Vec::Zero(6), l), x); };
    CHECK(bubble_d2_scale(dim, b, x) ==
          doctest::Approx((dl(lam + h) - dl(lam - h)) / (2 * h)).epsilon(1e-6));

    for (int i : {0, 3}) {
        auto dli = [&](double l) {
            return bubble_grad_center(dim, Bubble(Vec::Zero(6), l), x, i);
        };
        CHECK(bubble_d2_scale_center(dim, b, x, i) ==
              doctest::Approx((dli(lam + h) - dli(lam - h)) / (2 * h)).epsilon(1e-6));
        for (int j : {0, 1, 3}) {
            auto dyj = [&](double t) {
                Vec y = Vec::Zero(6);
                y[j] = t;
                return bubble_grad_center(dim, Bubble(y, lam), x, i);
            };
            CHECK(bubble_d2_center(dim, b, x, i, j) ==
                  doctest::Approx((dyj(h) - dyj(-h)) / (2 * h)).epsilon(1e-6));
        }
    }
}

TEST_CASE("biharmonic residual at round-off for n in {5,6,8}") {
    for (int n : {5, 6, 8}) {
        const Dimension dim(n);
        Bubble b(Vec::Zero(n), 1.0);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double r = 20.0 * k / 99.0;
            const Vec x = unit(n, 0, r);
            const double u = bubble_value(dim, b, x);
            worst = std::max(worst, std::abs(bubble_residual(dim, b, x)) / std::pow(u, dim.p()));
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("residual limit branch and scale identity") {
    const Dimension dim(6);
    Bubble b(Vec::Zero(6), 1.0);
    const double u0 = bubble_value(dim, b, Vec::Zero(6));
    CHECK(std::abs(bubble_residual(dim, b, Vec::Zero(6))) / std::pow(u0, dim.p()) <= 1e-9);
    // residual(lambda=4, r) = lambda^{(n+4)/2} residual(lambda=1, lambda r); both are ~0,
    // so compare the two assembled bilaplacians, which carry the actual magnitude
    Bubble b4(Vec::Zero(6), 4.0);
    for (double r : {0.3, 1.0, 2.5}) {
        const double lhs = bubble_residual(dim, b4, unit(6, 0, r));
        const double rhs = std::pow(4.0, (6.0 + 4.0) / 2.0) *
                           bubble_residual(dim, b, unit(6, 0, 4.0 * r));
        const double scale = std::pow(bubble_value(dim, b4, unit(6, 0, r)), dim.p());
        CHECK(std::abs(lhs - rhs) / scale <= 1e-9);
    }
}

TEST_CASE("k profile model, far field, and invariants") {
    const int n = 6;
    Vec z = Vec::Zero(n), a = Vec::Constant(n, -1.0);
    KProfile p(z, a, 1.5, 0.5, 0.0, 1.0);
    CHECK(p.value(z) == doctest::Approx(0.0));
    CHECK(p.value(unit(n, 0, 1.0)) == doctest::Approx(-1.0));
    // K0 shifts everything
    KProfile p2(z, a, 1.5, 0.5, 3.0, 1.0);
    CHECK(p2.value(z) == doctest::Approx(3.0));
    // outside 2 r0 the default far field is the baseline
    CHECK(p2.value(unit(n, 0, 2.5)) == doctest::Approx(3.0));
    // bounded on the blend shell
    for (double r : {1.1, 1.5, 1.9}) CHECK(std::abs(p.value(unit(n, 0, r))) <= n * 1.0 + 1.0);

    CHECK_THROWS(KProfile(z, Vec::Constant(n, 1.0), 1.5, 0.5, 0.0, 1.0));  // sum a >= 0
    Vec azero = a;
    azero[2] = 0.0;
    CHECK_THROWS(KProfile(z, azero, 1.5, 0.5, 0.0, 1.0));
    CHECK_THROWS(KProfile(z, a, 0.9, 0.5, 0.0, 1.0));   // beta <= 1
    CHECK_THROWS(KProfile(z, a, 2.0, 0.5, 0.0, 1.0));   // beta >= n-4
    CHECK_THROWS(KProfile(z, a, 1.5, 1.5, 0.0, 1.0));   // sigma out of range
    CHECK_THROWS(KProfile(z, a, 1.5, 0.5, 0.0, -1.0));  // r0 <= 0
}

TEST_CASE("composite K requires disjoint model balls") {
    const int n = 6;
    Vec z2 = unit(n, 0, 1.0);
    Vec a = Vec::Constant(n, -1.0);
    KProfile p1(Vec::Zero(n), a, 1.5, 0.5, 1.0, 0.2);
    KProfile p2(z2, a, 1.5, 0.5, 1.0, 0.2);
    CompositeK K(p1, p2);
    CHECK(K.value(Vec::Zero(n)) == doctest::Approx(1.0));
    CHECK(K.value(z2) == doctest::Approx(1.0));
    KProfile wide(z2, a, 1.5, 0.5, 1.0, 0.3);
    CHECK_THROWS(CompositeK(p1, wide));
}

TEST_CASE("peak ansatz recomputes eps12 on access") {
    const Dimension dim(6);
    PeakAnsatz ansatz({1.0, 1.0}, {Bubble(Vec::Zero(6), 10.0), Bubble(unit(6, 0, 1.0), 10.0)});
    CHECK(ansatz.eps12(dim) == doctest::Approx(0.01).epsilon(1e-14));
    ansatz.bubbles[0].lambda = 20.0;
    CHECK(ansatz.eps12(dim) == doctest::Approx(0.005).epsilon(1e-14));
    CHECK_THROWS(PeakAnsatz({-1.0, 1.0}, {Bubble(Vec::Zero(6), 1.0), Bubble(Vec::Zero(6), 1.0)}));
}

TEST_CASE("search box membership matches the D_mu and M_mu definitions") {
    const int n = 6;
    SearchBox box(0.1, {Vec::Zero(n), unit(n, 0, 1.0)});
    PeakAnsatz inside({1.05, 0.95},
                      {Bubble(unit(n, 1, 0.05), 11.0), Bubble(unit(n, 0, 1.0), 200.0)});
    CHECK(box.contains(inside, 0.05));
    CHECK_FALSE(box.contains(inside, 0.2));  // ||v|| > mu
    PeakAnsatz badLambda({1.0, 1.0}, {Bubble(Vec::Zero(n), 9.0), Bubble(unit(n, 0, 1.0), 11.0)});
    CHECK_FALSE(box.contains(badLambda, 0.0));  // lambda <= 1/mu
    PeakAnsatz badCenter({1.0, 1.0},
                         {Bubble(unit(n, 1, 0.2), 11.0), Bubble(unit(n, 0, 1.0), 11.0)});
    CHECK_FALSE(box.contains(badCenter, 0.0));
    PeakAnsatz badAlpha({1.2, 1.0}, {Bubble(Vec::Zero(n), 11.0), Bubble(unit(n, 0, 1.0), 11.0)});
    CHECK_FALSE(box.contains(badAlpha, 0.0));
}
