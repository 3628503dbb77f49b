#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "bubbleforge/dimension.hpp"

namespace bubbleforge {

using Vec = Eigen::VectorXd;

// One bubble: center y and concentration scale lambda > 0.
struct Bubble {
    Vec y;
    double lambda;

    Bubble(Vec center, double scale) : y(std::move(center)), lambda(scale) {
        if (!(lambda > 0.0)) throw std::invalid_argument("Bubble: lambda > 0 required");
    }
};

namespace radial {

// Closed-form radial derivatives of f(s) = (1+s^2)^(-m), the unit bubble profile.
inline double f0(double m, double s) { return std::pow(1.0 + s * s, -m); }

inline double f1(double m, double s) {
    const double w = 1.0 + s * s;
    return -2.0 * m * s * std::pow(w, -m - 1.0);
}

inline double f2(double m, double s) {
    const double w = 1.0 + s * s;
    return -2.0 * m * std::pow(w, -m - 1.0) + 4.0 * m * (m + 1.0) * s * s * std::pow(w, -m - 2.0);
}

inline double f3(double m, double s) {
    const double w = 1.0 + s * s;
    return 12.0 * m * (m + 1.0) * s * std::pow(w, -m - 2.0) -
           8.0 * m * (m + 1.0) * (m + 2.0) * s * s * s * std::pow(w, -m - 3.0);
}

inline double f4(double m, double s) {
    const double w = 1.0 + s * s;
    const double s2 = s * s;
    return 12.0 * m * (m + 1.0) * std::pow(w, -m - 2.0) -
           48.0 * m * (m + 1.0) * (m + 2.0) * s2 * std::pow(w, -m - 3.0) +
           16.0 * m * (m + 1.0) * (m + 2.0) * (m + 3.0) * s2 * s2 * std::pow(w, -m - 4.0);
}

// Radial bilaplacian of f at s: f'''' + 2(n-1)f'''/s + (n-1)(n-3)(f''/s^2 - f'/s^3).
// Below the switch radius the three singular quotients are replaced by their
// closed-form regroupings (f'''/s and (f'' - f'/s)/s^2 are entire in s^2),
// which realizes the even-function limit at s = 0 without division.
inline double bilaplacian_f(int n, double m, double s) {
    const double w = 1.0 + s * s;
    const double s2 = s * s;
    if (s > 1e-2) {
        return f4(m, s) + 2.0 * (n - 1) * f3(m, s) / s +
               (n - 1) * (n - 3) * (f2(m, s) / s2 - f1(m, s) / (s2 * s));
    }
    const double f3_over_s = 12.0 * m * (m + 1.0) * std::pow(w, -m - 2.0) -
                             8.0 * m * (m + 1.0) * (m + 2.0) * s2 * std::pow(w, -m - 3.0);
    const double f2_minus_f1s_over_s2 = 4.0 * m * (m + 1.0) * std::pow(w, -m - 2.0);
    return f4(m, s) + 2.0 * (n - 1) * f3_over_s + (n - 1) * (n - 3) * f2_minus_f1s_over_s2;
}

}  // namespace radial

// U_{y,lambda}(x) = c_N lambda^m / (1 + lambda^2 |x-y|^2)^m,  m = (n-4)/2
inline double bubble_value(const Dimension& dim, const Bubble& b, const Vec& x) {
    const double r2 = (x - b.y).squaredNorm();
    const double w = 1.0 + b.lambda * b.lambda * r2;
    return dim.cN * std::pow(b.lambda, dim.m()) * std::pow(w, -dim.m());
}

// dU/dlambda = U * (m/lambda) (1 - lambda^2 r^2)/(1 + lambda^2 r^2)
inline double bubble_grad_scale(const Dimension& dim, const Bubble& b, const Vec& x) {
    const double t = b.lambda * b.lambda * (x - b.y).squaredNorm();
    return bubble_value(dim, b, x) * (dim.m() / b.lambda) * (1.0 - t) / (1.0 + t);
}

// dU/dy_i = (n-4) lambda^2 (x_i - y_i) U / (1 + lambda^2 r^2), axis is 0-based
inline double bubble_grad_center(const Dimension& dim, const Bubble& b, const Vec& x, int axis) {
    if (axis < 0 || axis >= dim.n) throw std::invalid_argument("bubble_grad_center: axis out of range");
    const double t = b.lambda * b.lambda * (x - b.y).squaredNorm();
    return (dim.n - 4) * b.lambda * b.lambda * (x[axis] - b.y[axis]) * bubble_value(dim, b, x) / (1.0 + t);
}

// second derivatives, needed for the multiplier correction terms
inline double bubble_d2_scale(const Dimension& dim, const Bubble& b, const Vec& x) {
    const double m = dim.m();
    const double t = b.lambda * b.lambda * (x - b.y).squaredNorm();
    const double w = 1.0 + t;
    const double bracket = (m - 1.0) - (2.0 * m + 4.0) * t + (m + 1.0) * t * t;
    return (m / (b.lambda * b.lambda)) * bubble_value(dim, b, x) * bracket / (w * w);
}

inline double bubble_d2_scale_center(const Dimension& dim, const Bubble& b, const Vec& x, int axis) {
    const double m = dim.m();
    const double t = b.lambda * b.lambda * (x - b.y).squaredNorm();
    const double w = 1.0 + t;
    return 2.0 * m * b.lambda * (x[axis] - b.y[axis]) * bubble_value(dim, b, x) *
           ((m + 2.0) - m * t) / (w * w);
}

inline double bubble_d2_center(const Dimension& dim, const Bubble& b, const Vec& x, int ai, int aj) {
    const double m = dim.m();
    const double lam2 = b.lambda * b.lambda;
    const double t = lam2 * (x - b.y).squaredNorm();
    const double w = 1.0 + t;
    const double di = x[ai] - b.y[ai], dj = x[aj] - b.y[aj];
    const double delta = (ai == aj) ? 1.0 : 0.0;
    return (2.0 * m * lam2 / (w * w)) * bubble_value(dim, b, x) *
           (2.0 * (m + 1.0) * lam2 * di * dj - delta * w);
}

// Delta^2 U - U^(2*-1), assembled from the closed-form radial derivatives.
// Zero up to round-off for every (y, lambda, x).
inline double bubble_residual(const Dimension& dim, const Bubble& b, const Vec& x) {
    const double m = dim.m();
    const double s = b.lambda * std::sqrt((x - b.y).squaredNorm());
    const double bil = dim.cN * std::pow(b.lambda, m + 4.0) * radial::bilaplacian_f(dim.n, m, s);
    const double u = bubble_value(dim, b, x);
    return bil - std::pow(u, dim.p());
}

}  // namespace bubbleforge
