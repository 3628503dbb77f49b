#pragma once

#include "bubbleforge/kprofile.hpp"
#include "bubbleforge/mc.hpp"
#include "bubbleforge/quadrature.hpp"

namespace bubbleforge {

// Raw integrals behind the appendix estimates. Shared by the constants module
// (constant extraction) and the expansion lab (scaling-law verification).

// int K U^{2*-1} dU/dlambda for a bubble centered at the profile's critical
// point. Deterministic: anisotropic weight reduced by sphere moments, radial
// part integrated piecewise in s = lambda*r over model ball, blend shell, and
// nothing beyond 2 r0. The K0 part vanishes identically (lambda invariance).
inline double b1_integral(const Dimension& dim, const KProfile& prof, double lambda,
                          const QuadratureSpec& spec) {
    const int n = dim.n;
    const double beta = prof.beta(), r0 = prof.r0(), m = dim.m();
    const double pref = prof.sumA() * sphere_moment(dim, beta) * sphere_area(n) *
                        m * std::pow(dim.cN, dim.twoStar) / lambda;
    auto core = [&](double s) {
        return std::pow(s, n - 1.0) * (1.0 - s * s) * std::pow(1.0 + s * s, -(n + 1.0));
    };
    const double T = lambda * r0;
    const int nn = spec.radialNodes;
    double modelPart = quad::on_interval([&](double s) { return std::pow(s, beta) * core(s); },
                                         0.0, std::min(4.0, T), nn);
    if (T > 4.0)
        modelPart += quad::on_interval_log([&](double s) { return std::pow(s, beta) * core(s); },
                                           4.0, T, nn);
    double blendPart = quad::on_interval(
        [&](double s) {
            const double u = (s / lambda - r0) / r0;
            const double wgt = 1.0 - u * u * (3.0 - 2.0 * u);
            return wgt * std::pow(r0, beta) * std::pow(lambda, beta) * core(s);
        },
        T, 2.0 * T, nn);
    return pref * std::pow(lambda, -beta) * (modelPart + blendPart);
}

// int U_k^{2*-2} (dU_k/dlambda_k) U_l, two bubbles separated by d
inline double b2_integral(const Dimension& dim, double lambda1, double lambda2, double d,
                          const QuadratureSpec& spec) {
    auto grid = quad::build_axial_grid(dim.n, {{0.0, 1.0 / lambda1}, {d, 1.0 / lambda2}},
                                       spec.radialNodes, spec.transverseNodes);
    const double m = dim.m(), p = dim.p(), C = dim.cN;
    auto U = [&](double r, double lam) {
        return C * std::pow(lam, m) * std::pow(1.0 + lam * lam * r * r, -m);
    };
    auto dlU = [&](double r, double lam) {
        const double t = lam * lam * r * r;
        return U(r, lam) * (m / lam) * (1.0 - t) / (1.0 + t);
    };
    return quad::integrate_on_grid(grid, [&](double u, double s) {
        const double r1 = std::hypot(u, s), r2 = std::hypot(u - d, s);
        return std::pow(U(r1, lambda1), p - 1.0) * dlU(r1, lambda1) * U(r2, lambda2);
    });
}

// proof identity rhs: (1/(2*-1)) int (dU_k/dlambda_k) U_l^{2*-1}
inline double b2_identity_rhs(const Dimension& dim, double lambda1, double lambda2, double d,
                              const QuadratureSpec& spec) {
    auto grid = quad::build_axial_grid(dim.n, {{0.0, 1.0 / lambda1}, {d, 1.0 / lambda2}},
                                       spec.radialNodes, spec.transverseNodes);
    const double m = dim.m(), p = dim.p(), C = dim.cN;
    auto U = [&](double r, double lam) {
        return C * std::pow(lam, m) * std::pow(1.0 + lam * lam * r * r, -m);
    };
    auto dlU = [&](double r, double lam) {
        const double t = lam * lam * r * r;
        return U(r, lam) * (m / lam) * (1.0 - t) / (1.0 + t);
    };
    return quad::integrate_on_grid(grid, [&](double u, double s) {
        const double r1 = std::hypot(u, s), r2 = std::hypot(u - d, s);
        return dlU(r1, lambda1) * std::pow(U(r2, lambda2), p) / p;
    });
}

// axial component of int U_k^{2*-2} (dU_k/dy_i) U_l; bubble k at axial position 0,
// bubble l at +d, so (y_i^k - y_i^l) = -d on the separation axis.
inline double b4_integral_axial(const Dimension& dim, double lambda1, double lambda2, double d,
                                const QuadratureSpec& spec) {
    auto grid = quad::build_axial_grid(dim.n, {{0.0, 1.0 / lambda1}, {d, 1.0 / lambda2}},
                                       spec.radialNodes, spec.transverseNodes);
    const double m = dim.m(), p = dim.p(), C = dim.cN;
    auto U = [&](double r, double lam) {
        return C * std::pow(lam, m) * std::pow(1.0 + lam * lam * r * r, -m);
    };
    return quad::integrate_on_grid(grid, [&](double u, double s) {
        const double r1 = std::hypot(u, s), r2 = std::hypot(u - d, s);
        const double U1 = U(r1, lambda1);
        const double dyU = (dim.n - 4) * lambda1 * lambda1 * u * U1 /
                           (1.0 + lambda1 * lambda1 * r1 * r1);
        return std::pow(U1, p - 1.0) * dyU * U(r2, lambda2);
    });
}

// int U_k^{2*-1} U_l, the leading interaction integral
inline double interaction_integral(const Dimension& dim, double lambda1, double lambda2, double d,
                                   const QuadratureSpec& spec) {
    auto grid = quad::build_axial_grid(dim.n, {{0.0, 1.0 / lambda1}, {d, 1.0 / lambda2}},
                                       spec.radialNodes, spec.transverseNodes);
    const double m = dim.m(), p = dim.p(), C = dim.cN;
    auto U = [&](double r, double lam) {
        return C * std::pow(lam, m) * std::pow(1.0 + lam * lam * r * r, -m);
    };
    return quad::integrate_on_grid(grid, [&](double u, double s) {
        return std::pow(U(std::hypot(u, s), lambda1), p) * U(std::hypot(u - d, s), lambda2);
    });
}

// int K U^{2*-1} dU/dy_axis for a bubble displaced off the critical point.
// Monte Carlo with antithetic reflection about the bubble center (the even part
// of K cancels in pairs, which is what makes the linear term resolvable).
inline McResult b3_integral_mc(const Dimension& dim, const KProfile& prof, const Bubble& b,
                               int axis, const QuadratureSpec& spec, std::uint64_t stream = 0) {
    BubbleMixture mix(dim, b, b);
    return integrate_mc(
        [&](const Vec& x) {
            return prof.value(x) * std::pow(bubble_value(dim, b, x), dim.p() - 1.0) *
                   bubble_grad_center(dim, b, x, axis);
        },
        dim, spec, mix, stream);
}

}  // namespace bubbleforge
