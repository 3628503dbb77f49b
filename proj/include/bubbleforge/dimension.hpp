#pragma once

#include <cmath>
#include <stdexcept>

namespace bubbleforge {

// Ambient dimension n >= 5 with the derived critical exponent 2* = 2n/(n-4)
// and the bubble normalization constant c_N = [(n-4)(n-2)n(n+2)]^((n-4)/8).
struct Dimension {
    int n;
    double twoStar;
    double cN;

    explicit Dimension(int n_) : n(n_) {
        if (n < 5) throw std::invalid_argument("Dimension: n >= 5 required");
        twoStar = 2.0 * n / (n - 4.0);
        cN = std::pow(static_cast<double>(n - 4) * (n - 2) * n * (n + 2), (n - 4) / 8.0);
    }

    // bubble profile exponent (n-4)/2
    double m() const { return (n - 4) / 2.0; }
    // 2* - 1, the nonlinearity power
    double p() const { return twoStar - 1.0; }
    // beta must lie in (1, n-4); empty for n = 5, so the theorem pipeline needs n >= 6
    bool pipelineAdmissible() const { return n >= 6; }
};

// surface area of the unit sphere S^{d-1} in R^d
inline double sphere_area(int d) {
    return 2.0 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0);
}

// Euler beta function
inline double beta_fn(double a, double b) {
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

}  // namespace bubbleforge
