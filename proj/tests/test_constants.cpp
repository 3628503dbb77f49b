#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bubbleforge/constants.hpp"

using namespace bubbleforge;

namespace {
const Dimension dim6(6);
const QuadratureSpec spec{};
}  // namespace

TEST_CASE("structure constants: A from quadrature and Beta identity") {
    const StructureConstants sc = structure_constants(dim6, spec);
    // A(6) = 384^{3/2} pi^3 / 60
    const double Aref = std::pow(384.0, 1.5) * std::pow(M_PI, 3.0) / 60.0;
    CHECK(sc.A == doctest::Approx(3888.6173025429).epsilon(1e-9));
    CHECK(sc.A == doctest::Approx(Aref).epsilon(1e-10));
    CHECK(std::abs(sc.A - closed_form_A(dim6)) <= 1e-8 * sc.A);
    CHECK(std::abs(sc.E - sc.A) <= 1e-10 * sc.A);
    CHECK(sc.F > 0.0);
    CHECK(sc.G > 0.0);
    // frozen independent quadrature oracle
    CHECK(sc.F == doctest::Approx(2777.5837875306643).epsilon(1e-8));
    CHECK(sc.G == doctest::Approx(2777.5837875306647).epsilon(1e-8));
}

TEST_CASE("structure constants for n = 5 and n = 8") {
    const StructureConstants s5 = structure_constants(Dimension(5), spec);
    CHECK(s5.A == doctest::Approx(325.67638114557934).epsilon(1e-9));
    CHECK(s5.F == doctest::Approx(122.12864292959223).epsilon(1e-8));
    const StructureConstants s8 = structure_constants(Dimension(8), spec);
    CHECK(s8.A == doctest::Approx(427486.7537949366).epsilon(1e-9));
    CHECK(s8.G == doctest::Approx(569982.3383932484).epsilon(1e-8));
}

TEST_CASE("F and G are scale invariant after the table normalization") {
    const double f1 = f_constant_at(dim6, 1.0, spec);
    const double f7 = f_constant_at(dim6, 7.0, spec);
    CHECK(std::abs(f1 - f7) <= 1e-8 * std::abs(f1));
    const double g1 = g_constant_at(dim6, 1.0, spec);
    const double g7 = g_constant_at(dim6, 7.0, spec);
    CHECK(std::abs(g1 - g7) <= 1e-8 * std::abs(g1));
    // a third scale, pairwise
    const double f3 = f_constant_at(dim6, 3.0, spec);
    CHECK(std::abs(f3 - f7) <= 1e-8 * std::abs(f3));
}

TEST_CASE("single-bubble orthogonality table") {
    Bubble b(Vec::Zero(6), 2.0);
    const double A = closed_form_A(dim6);
    CHECK(std::abs(bubble_pair_inner(dim6, b, DTag::Value, 0, DTag::DLambda, 0, spec)) <=
          1e-10 * A);
    CHECK(bubble_pair_inner(dim6, b, DTag::Value, 0, DTag::DCenter, 2, spec) == 0.0);
    CHECK(bubble_pair_inner(dim6, b, DTag::DLambda, 0, DTag::DCenter, 1, spec) == 0.0);
    CHECK(bubble_pair_inner(dim6, b, DTag::DCenter, 0, DTag::DCenter, 3, spec) == 0.0);
    // diagonal positivity
    CHECK(bubble_pair_inner(dim6, b, DTag::DLambda, 0, DTag::DLambda, 0, spec) > 0.0);
}

TEST_CASE("c_n_beta: value, positivity, monotonicity, domain") {
    CHECK(c_n_beta(dim6, 1.5, spec) == doctest::Approx(281.6322996234693).epsilon(1e-7));
    double prev = 0.0;
    for (double beta : {1.1, 1.3, 1.5, 1.7, 1.9}) {
        const double c = c_n_beta(dim6, beta, spec);
        CHECK(c > prev);
        prev = c;
    }
    // frozen grid from the pre-build table
    CHECK(c_n_beta(dim6, 1.1, spec) == doctest::Approx(251.4232).epsilon(1e-4));
    CHECK(c_n_beta(dim6, 1.9, spec) == doctest::Approx(314.476).epsilon(1e-4));
    CHECK_THROWS(c_n_beta(dim6, 1.0, spec));
    CHECK_THROWS(c_n_beta(dim6, 2.0, spec));
}

TEST_CASE("d_n_beta and the reduced proof integral") {
    CHECK(d_n_beta(dim6, 1.5, spec) == doctest::Approx(1267.3453483056119).epsilon(1e-7));
    for (double beta : {1.1, 1.5, 1.9}) CHECK(d_n_beta(dim6, beta, spec) > 0.0);
    CHECK_THROWS(d_n_beta(dim6, 0.9, spec));
    // int_0^inf r^{beta+n-1}/(1+r^2)^{n+1} dr = (1/2) B((beta+n)/2, (n+2-beta)/2);
    // for n=6, beta=1.5 this is (1/2) B(3.75, 3.25)
    const auto q = integrate_radial(
        [](double r) { return std::pow(r, 1.5) * std::pow(1.0 + r * r, -7.0); }, dim6, spec);
    const double betaIdent = 0.5 * beta_fn(3.75, 3.25);
    CHECK(q.value == doctest::Approx(betaIdent).epsilon(1e-8));
    CHECK(betaIdent == doctest::Approx(0.007830093068806323).epsilon(1e-12));
}

TEST_CASE("theta caps beta at (n+4)/2") {
    CHECK(theta(dim6, 1.5) == doctest::Approx(1.5));
    CHECK(theta(dim6, 7.0) == doctest::Approx(5.0));
    CHECK(theta(Dimension(5), 4.5) == doctest::Approx(4.5));
    CHECK_THROWS(theta(dim6, 0.0));
}

TEST_CASE("interaction constants: fitted prefactors with closed-form oracles") {
    const InteractionConstants ic = interaction_constants(dim6, spec);
    // C0 = C^{2*} (1/2) B(n/2, 2) |S^{n-1}| / (2*-1), which for n=6 equals A/2
    const double C0ref = closed_form_A(dim6) / 2.0;
    CHECK(ic.c0 > 0.0);
    CHECK(std::abs(ic.c0 - C0ref) / C0ref <= 0.05);
    CHECK(ic.c0MaxRelDev <= 0.05);
    // |C1| = (n-4) C0 / d^{n-2} at unit separation
    const double C1ref = 2.0 * C0ref;
    CHECK(ic.c1 > 0.0);
    CHECK(std::abs(ic.c1 - C1ref) / C1ref <= 0.05);
    CHECK(ic.c1MaxRelDev <= 0.05);
    // measured orientation of the axial b4 integral is opposite (y_i^k - y_i^l)
    CHECK(ic.b4AxialOrientation == -1);

    // separation collapse: d^{n-4}-normalized estimates agree across separations
    const InteractionConstants ic2 = interaction_constants(dim6, spec, {10, 20, 40, 80}, 2.0);
    CHECK(std::abs(ic2.c0 - ic.c0) / ic.c0 <= 0.05);
}

TEST_CASE("expansion model assembles positive m_k") {
    Vec z2 = Vec::Zero(6);
    z2[0] = 1.0;
    const Vec a = Vec::Constant(6, -1.0);
    KProfile p1(Vec::Zero(6), a, 1.5, 0.5, 1.0, 0.2);
    KProfile p2(z2, a, 1.5, 0.5, 1.0, 0.2);
    const ExpansionModel em = build_expansion_model(dim6, p1, p2, 1.0, spec);
    CHECK(em.cNbeta[0] == doctest::Approx(281.632).epsilon(1e-4));
    CHECK(em.dNbeta[0] == doctest::Approx(1267.345).epsilon(1e-4));
    CHECK(em.c0 > 0.0);
    CHECK(em.c1 > 0.0);
    CHECK(em.mk[0] > 0.0);
    CHECK(em.mk[1] > 0.0);
    CHECK(em.thetaJ[0] == doctest::Approx(1.5));
    CHECK(em.dk[0] == doctest::Approx(em.mk[0] * 6.0).epsilon(1e-12));
    // every error exponent starts unset
    for (const auto& [name, val] : em.errorExponents) CHECK_FALSE(val.has_value());
}
