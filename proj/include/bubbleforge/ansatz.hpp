#pragma once

#include <array>

#include "bubbleforge/bubble.hpp"

namespace bubbleforge {

// Two-bubble ansatz (alpha_1, alpha_2, y^1, y^2, lambda_1, lambda_2).
// eps12 is recomputed from the bubbles on every access, never stored.
struct PeakAnsatz {
    std::array<double, 2> alpha;
    std::array<Bubble, 2> bubbles;

    PeakAnsatz(std::array<double, 2> a, std::array<Bubble, 2> b)
        : alpha(a), bubbles(std::move(b)) {
        if (!(alpha[0] > 0.0 && alpha[1] > 0.0))
            throw std::invalid_argument("PeakAnsatz: alpha_j > 0 required");
    }

    double eps12(const Dimension& dim) const {
        return std::pow(bubbles[0].lambda * bubbles[1].lambda, -dim.m());
    }
};

inline double interaction_eps12(const Dimension& dim, double lambda1, double lambda2) {
    return std::pow(lambda1 * lambda2, -dim.m());
}

// D_mu x M_mu membership: |y^j - z^j| <= mu, lambda_j > 1/mu, |alpha_j - 1| <= mu, ||v|| <= mu.
struct SearchBox {
    double mu;
    std::array<Vec, 2> centers;

    SearchBox(double mu_, std::array<Vec, 2> z) : mu(mu_), centers(std::move(z)) {
        if (!(mu > 0.0)) throw std::invalid_argument("SearchBox: mu > 0 required");
    }

    bool containsGeometry(const std::array<Vec, 2>& y, const std::array<double, 2>& lambda) const {
        for (int j = 0; j < 2; ++j) {
            if ((y[j] - centers[j]).norm() > mu) return false;
            if (!(lambda[j] > 1.0 / mu)) return false;
        }
        return true;
    }

    bool contains(const PeakAnsatz& ansatz, double vNorm) const {
        if (std::abs(ansatz.alpha[0] - 1.0) > mu || std::abs(ansatz.alpha[1] - 1.0) > mu) return false;
        if (vNorm > mu) return false;
        return containsGeometry({ansatz.bubbles[0].y, ansatz.bubbles[1].y},
                                {ansatz.bubbles[0].lambda, ansatz.bubbles[1].lambda});
    }
};

}  // namespace bubbleforge
