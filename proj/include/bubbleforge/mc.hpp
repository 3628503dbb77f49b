#pragma once

#include <cstdint>
#include <random>

#include "bubbleforge/ansatz.hpp"
#include "bubbleforge/quadrature.hpp"

namespace bubbleforge {

// Deterministic RNG: mt19937_64 is bit-specified by the standard, and all
// variate mappings are implemented here rather than through std distributions
// (whose output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : eng_(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1))) {}

    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        haveSpare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    // Marsaglia-Tsang, valid for a >= 1 (only a = n/2 >= 2.5 is used here)
    double gammaVariate(double a) {
        const double d = a - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double betaSymmetric(double a) {  // Beta(a, a)
        const double g1 = gammaVariate(a), g2 = gammaVariate(a);
        return g1 / (g1 + g2);
    }

    void direction(Vec& out) {
        double norm2 = 0.0;
        do {
            for (int i = 0; i < out.size(); ++i) out[i] = normal();
            norm2 = out.squaredNorm();
        } while (norm2 <= 0.0);
        out /= std::sqrt(norm2);
    }

private:
    std::mt19937_64 eng_;
    bool haveSpare_ = false;
    double spare_ = 0.0;
};

struct McResult {
    double value = 0.0;
    double stderr_ = 0.0;
    bool precisionWarning = false;
};

// 50/50 mixture of the two bubble L^{2*} densities q_j = U_j^{2*} / A.
// Radius sampling uses v = (lambda r)^2 / (1 + (lambda r)^2) ~ Beta(n/2, n/2).
class BubbleMixture {
public:
    BubbleMixture(const Dimension& dim, const Bubble& b1, const Bubble& b2)
        : dim_(dim), b_{b1, b2} {
        normA_ = std::pow(dim.cN, dim.twoStar) * sphere_area(dim.n) * 0.5 *
                 beta_fn(dim.n / 2.0, dim.n / 2.0);
    }

    // density of the mixture at x
    double pdf(const Vec& x) const {
        return 0.5 * (component(0, x) + component(1, x));
    }

    Vec sample(Rng& rng) const {
        const int j = rng.uniform() < 0.5 ? 0 : 1;
        const double v = rng.betaSymmetric(dim_.n / 2.0);
        const double s = std::sqrt(v / (1.0 - v));
        Vec dir(dim_.n);
        rng.direction(dir);
        return b_[j].y + (s / b_[j].lambda) * dir;
    }

    // reflection center for antithetic pairing
    Vec midpoint() const { return 0.5 * (b_[0].y + b_[1].y); }

    const Bubble& bubble(int j) const { return b_[j]; }

private:
    double component(int j, const Vec& x) const {
        const double u = bubble_value(dim_, b_[j], x);
        return std::pow(u, dim_.twoStar) / normA_;
    }

    Dimension dim_;
    std::array<Bubble, 2> b_;
    double normA_;
};

// Importance-sampled Monte Carlo with antithetic reflection about the mixture
// midpoint. Unbiased for any integrable f; odd parts about the midpoint cancel
// exactly in pairs. Reported standard error above relTol*|value| only raises
// the precision warning, never a failure.
inline McResult integrate_mc(const std::function<double(const Vec&)>& f, const Dimension& dim,
                             const QuadratureSpec& spec, const BubbleMixture& mix,
                             std::uint64_t stream = 0) {
    spec.validate();
    Rng rng(spec.seed, stream);
    const Vec c = mix.midpoint();
    const long long pairs = spec.mcSamples / 2;
    double sum = 0.0, sumSq = 0.0;
    for (long long i = 0; i < pairs; ++i) {
        const Vec x = mix.sample(rng);
        const Vec xr = 2.0 * c - x;
        // the reflected stream has density q(2c - .), which at xr equals q(x)
        const double h = 0.5 * (f(x) + f(xr)) / mix.pdf(x);
        sum += h;
        sumSq += h * h;
    }
    McResult res;
    const double mean = sum / pairs;
    res.value = mean;
    const double var = std::max(0.0, sumSq / pairs - mean * mean);
    res.stderr_ = std::sqrt(var / pairs);
    res.precisionWarning = res.stderr_ > spec.relTol * std::abs(res.value);
    return res;
}

}  // namespace bubbleforge
