#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <utility>

#include "bubbleforge/bubble.hpp"

namespace bubbleforge {

// Local model of K near a critical point z:
//   K(x) = K0 + sum_i a_i |x_i - z_i|^beta   for |x - z| <= r0,
// with a bounded C^1 far field outside the model ball. The default far field
// clamps the model to the r0-sphere and blends it down to K0 over [r0, 2r0].
class KProfile {
public:
    KProfile(Vec z, Vec a, double beta, double sigma, double K0, double r0,
             std::function<double(const Vec&)> farField = nullptr)
        : z_(std::move(z)), a_(std::move(a)), beta_(beta), sigma_(sigma), K0_(K0), r0_(r0),
          farField_(std::move(farField)) {
        const int n = static_cast<int>(z_.size());
        if (a_.size() != z_.size()) throw std::invalid_argument("KProfile: a and z size mismatch");
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (a_[i] == 0.0) throw std::invalid_argument("KProfile: a_i != 0 required");
            sum += a_[i];
        }
        if (!(sum < 0.0)) throw std::invalid_argument("KProfile: sum a_i < 0 required");
        if (!(beta_ > 1.0 && beta_ < n - 4.0))
            throw std::invalid_argument("KProfile: beta in (1, n-4) required");
        if (!(sigma_ > 0.0 && sigma_ < 1.0))
            throw std::invalid_argument("KProfile: sigma in (0,1) required");
        if (!(r0_ > 0.0)) throw std::invalid_argument("KProfile: r0 > 0 required");
    }

    double value(const Vec& x) const {
        const double r = (x - z_).norm();
        if (r <= r0_) return K0_ + model(x);
        if (farField_) return farField_(x);
        return defaultFarField(x, r);
    }
    double operator()(const Vec& x) const { return value(x); }

    const Vec& z() const { return z_; }
    const Vec& a() const { return a_; }
    double beta() const { return beta_; }
    double sigma() const { return sigma_; }
    double K0() const { return K0_; }
    double r0() const { return r0_; }
    double sumA() const { return a_.sum(); }

private:
    double model(const Vec& x) const {
        double s = 0.0;
        for (int i = 0; i < x.size(); ++i) s += a_[i] * std::pow(std::abs(x[i] - z_[i]), beta_);
        return s;
    }
    double defaultFarField(const Vec& x, double r) const {
        if (r >= 2.0 * r0_) return K0_;
        const Vec clamped = z_ + (r0_ / r) * (x - z_);
        const double u = (r - r0_) / r0_;
        const double wgt = 1.0 - u * u * (3.0 - 2.0 * u);  // 1 at r0, 0 at 2 r0, C^1
        return K0_ + wgt * model(clamped);
    }

    Vec z_, a_;
    double beta_, sigma_, K0_, r0_;
    std::function<double(const Vec&)> farField_;
};

// Global K with two critical points: a background interpolating the two
// baseline values plus the two compactly supported local bumps
// (K_j - K0_j vanishes beyond 2 r0_j under the default far field).
class CompositeK {
public:
    CompositeK(KProfile p1, KProfile p2) : profs_{std::move(p1), std::move(p2)} {
        const double sep = (profs_[1].z() - profs_[0].z()).norm();
        if (sep <= 2.0 * (profs_[0].r0() + profs_[1].r0()))
            throw std::invalid_argument("CompositeK: model balls must be disjoint");
    }

    double value(const Vec& x) const {
        double v = background(x);
        for (const auto& p : profs_) {
            const double r = (x - p.z()).norm();
            if (r < 2.0 * p.r0()) v += p.value(x) - p.K0();
        }
        return v;
    }
    double operator()(const Vec& x) const { return value(x); }

    const KProfile& profile(int j) const { return profs_[j]; }
    int profileCount() const { return 2; }

private:
    double background(const Vec& x) const {
        const double k0 = profs_[0].K0(), k1 = profs_[1].K0();
        if (k0 == k1) return k0;
        const Vec axis = profs_[1].z() - profs_[0].z();
        const double t = (x - profs_[0].z()).dot(axis) / axis.squaredNorm();
        const double u = std::clamp(t, 0.0, 1.0);
        return k0 + (k1 - k0) * u * u * (3.0 - 2.0 * u);
    }

    std::array<KProfile, 2> profs_;
};

}  // namespace bubbleforge
