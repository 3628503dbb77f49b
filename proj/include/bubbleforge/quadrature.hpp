#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "bubbleforge/bubble.hpp"
#include "bubbleforge/dimension.hpp"

namespace bubbleforge {

// Deterministic quadrature parameters. Identical spec + seed give bit-identical results.
struct QuadratureSpec {
    int radialNodes = 96;
    double mapScale = 1.0;  // scale of the algebraic map r = s * t / (1 - t)
    int transverseNodes = 64;
    long long mcSamples = 200000;
    unsigned long long seed = 20260801ull;
    double relTol = 1e-8;

    void validate() const {
        if (radialNodes < 8 || transverseNodes < 8)
            throw std::invalid_argument("QuadratureSpec: node counts >= 8 required");
        if (!(relTol > 0.0 && relTol < 1.0))
            throw std::invalid_argument("QuadratureSpec: relTol in (0,1) required");
        if (!(mapScale > 0.0)) throw std::invalid_argument("QuadratureSpec: mapScale > 0 required");
        if (mcSamples < 2) throw std::invalid_argument("QuadratureSpec: mcSamples >= 2 required");
    }
};

struct QuadResult {
    double value = 0.0;
    double refineDelta = 0.0;  // relative change under node doubling
    bool converged = true;
};

namespace quad {

struct Rule {
    std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Gauss-Legendre rule, Newton iteration on P_n; cached per node count.
inline const Rule& gauss_legendre(int nn) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(nn);
    if (it != cache.end()) return it->second;

    Rule rule;
    rule.x.resize(nn);
    rule.w.resize(nn);
    const int half = (nn + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (nn + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= nn; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = nn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[nn - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.w[i] = w;
        rule.w[nn - 1 - i] = w;
    }
    return cache.emplace(nn, std::move(rule)).first->second;
}

template <class F>
double on_interval(F&& f, double a, double b, int nodes) {
    const Rule& r = gauss_legendre(nodes);
    const double mid = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < nodes; ++i) s += r.w[i] * f(mid + h * r.x[i]);
    return s * h;
}

// integral over [a, inf) with algebraic map u = a + scale * t/(1-t)
template <class F>
double tail_right(F&& f, double a, double scale, int nodes) {
    const Rule& r = gauss_legendre(nodes);
    double s = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double t = 0.5 * (r.x[i] + 1.0);
        const double om = 1.0 - t;
        s += 0.5 * r.w[i] * f(a + scale * t / om) * scale / (om * om);
    }
    return s;
}

template <class F>
double tail_left(F&& f, double b, double scale, int nodes) {
    return tail_right([&](double u) { return f(2.0 * b - u); }, b, scale, nodes);
}

// integral over [a, b], 0 < a < b, with logarithmic node placement
template <class F>
double on_interval_log(F&& f, double a, double b, int nodes) {
    const double L = std::log(b / a);
    return on_interval([&](double t) { const double u = a * std::exp(L * t); return f(u) * u * L; },
                       0.0, 1.0, nodes);
}

}  // namespace quad

// int_0^inf f(r) r^(n-1) dr via Gauss nodes under r = s*t/(1-t).
// converged flag compares against a doubled rule per relTol.
inline QuadResult integrate_radial(const std::function<double(double)>& f, const Dimension& dim,
                                   const QuadratureSpec& spec) {
    spec.validate();
    auto eval = [&](int nodes) {
        return quad::tail_right([&](double r) { return f(r) * std::pow(r, dim.n - 1); }, 0.0,
                                spec.mapScale, nodes);
    };
    const double v1 = eval(spec.radialNodes);
    const double v2 = eval(2 * spec.radialNodes);
    QuadResult res;
    res.value = v2;
    const double scale = std::max({std::abs(v1), std::abs(v2), 1e-300});
    res.refineDelta = std::abs(v2 - v1) / scale;
    res.converged = res.refineDelta <= spec.relTol || std::abs(v2 - v1) < 1e-300;
    return res;
}

// E[|w_1|^beta] over the uniform unit sphere S^{d-1}.
inline double sphere_moment_d(int d, double beta) {
    if (!(beta > -1.0)) throw std::invalid_argument("sphere_moment: beta > -1 required");
    if (d == 1) return 1.0;
    return std::exp(std::lgamma((beta + 1.0) / 2.0) + std::lgamma(d / 2.0) -
                    std::lgamma(0.5) - std::lgamma((d + beta) / 2.0));
}

inline double sphere_moment(const Dimension& dim, double beta) { return sphere_moment_d(dim.n, beta); }

namespace quad {

// One cluster of activity on the axis: position and width scale.
struct Interest {
    double pos;
    double width;
};

struct AxialGrid {
    std::vector<double> u, s, w;  // flattened nodes and full weights (incl. s^{n-2} |S^{n-2}|)
};

// Quadrature grid for integrals |S^{n-2}| \int\int F(u,s) s^{n-2} ds du where the
// integrand clusters around the given axis positions. Panels: fine + shoulder
// windows per cluster, log-spaced bridges between far clusters, algebraic tails.
inline AxialGrid build_axial_grid(int n, std::vector<Interest> pts, int uNodes, int sNodes) {
    if (pts.empty()) throw std::invalid_argument("build_axial_grid: no interest points");
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.pos < b.pos; });
    // merge clusters whose shoulder windows overlap
    std::vector<Interest> merged;
    for (const auto& p : pts) {
        if (!merged.empty() && p.pos - 48.0 * p.width < merged.back().pos + 48.0 * merged.back().width) {
            auto& m = merged.back();
            const double lo = std::min(m.pos - m.width, p.pos - p.width);
            const double hi = std::max(m.pos + m.width, p.pos + p.width);
            m.pos = 0.5 * (lo + hi);
            m.width = 0.5 * (hi - lo);
        } else {
            merged.push_back(p);
        }
    }

    // u-breakpoints per cluster, plus bridges
    struct Seg { double a, b; bool logMap; };
    std::vector<Seg> segs;
    const double off[6] = {-48.0, -8.0, -0.5, 0.5, 8.0, 48.0};
    for (size_t c = 0; c < merged.size(); ++c) {
        for (int k = 0; k + 1 < 6; ++k)
            segs.push_back({merged[c].pos + off[k] * merged[c].width,
                            merged[c].pos + off[k + 1] * merged[c].width, false});
        if (c + 1 < merged.size()) {
            const double a = merged[c].pos + 48.0 * merged[c].width;
            const double b = merged[c + 1].pos - 48.0 * merged[c + 1].width;
            if (b > a) {
                const bool lg = a > 0.0 && b / a > 8.0;
                segs.push_back({a, b, lg});
            }
        }
    }

    const Rule& ur = gauss_legendre(uNodes);
    std::vector<std::pair<double, double>> unodes;  // (u, weight)
    for (const auto& sg : segs) {
        if (sg.logMap) {
            const double L = std::log(sg.b / sg.a);
            for (int i = 0; i < uNodes; ++i) {
                const double t = 0.5 * (ur.x[i] + 1.0);
                const double u = sg.a * std::exp(L * t);
                unodes.emplace_back(u, 0.5 * ur.w[i] * u * L);
            }
        } else {
            const double mid = 0.5 * (sg.a + sg.b), h = 0.5 * (sg.b - sg.a);
            for (int i = 0; i < uNodes; ++i)
                unodes.emplace_back(mid + h * ur.x[i], h * ur.w[i]);
        }
    }
    // algebraic tails on both sides, scale set by the outer cluster width
    {
        const double aL = merged.front().pos - 48.0 * merged.front().width;
        const double wL = 48.0 * merged.front().width;
        const double aR = merged.back().pos + 48.0 * merged.back().width;
        const double wR = 48.0 * merged.back().width;
        for (int i = 0; i < uNodes; ++i) {
            const double t = 0.5 * (ur.x[i] + 1.0);
            const double om = 1.0 - t;
            const double jac = 0.5 * ur.w[i] / (om * om);
            unodes.emplace_back(aL - wL * t / om, jac * wL);
            unodes.emplace_back(aR + wR * t / om, jac * wR);
        }
    }

    // s-panels at the finest cluster scale plus algebraic tail
    double wmin = merged.front().width, wmax = merged.front().width;
    for (const auto& m : merged) {
        wmin = std::min(wmin, m.width);
        wmax = std::max(wmax, m.width);
    }
    const Rule& sr = gauss_legendre(sNodes);
    std::vector<std::pair<double, double>> snodes;
    const double sb[4] = {0.0, 0.5 * wmin, 8.0 * wmax, 48.0 * wmax};
    for (int k = 0; k + 1 < 4; ++k) {
        const double mid = 0.5 * (sb[k] + sb[k + 1]), h = 0.5 * (sb[k + 1] - sb[k]);
        for (int i = 0; i < sNodes; ++i) snodes.emplace_back(mid + h * sr.x[i], h * sr.w[i]);
    }
    for (int i = 0; i < sNodes; ++i) {
        const double t = 0.5 * (sr.x[i] + 1.0);
        const double om = 1.0 - t;
        const double scale = 48.0 * wmax;
        snodes.emplace_back(sb[3] + scale * t / om, 0.5 * sr.w[i] * scale / (om * om));
    }

    const double area = sphere_area(n - 1);  // |S^{n-2}|
    AxialGrid g;
    g.u.reserve(unodes.size() * snodes.size());
    g.s.reserve(unodes.size() * snodes.size());
    g.w.reserve(unodes.size() * snodes.size());
    for (const auto& [u, wu] : unodes)
        for (const auto& [s, ws] : snodes) {
            g.u.push_back(u);
            g.s.push_back(s);
            g.w.push_back(area * wu * ws * std::pow(s, n - 2));
        }
    return g;
}

template <class F>
double integrate_on_grid(const AxialGrid& g, F&& f) {
    double acc = 0.0;
    for (size_t i = 0; i < g.w.size(); ++i) acc += g.w[i] * f(g.u[i], g.s[i]);
    return acc;
}

}  // namespace quad

// Integral over R^n of f(r1, r2), r_j = |x - c_j|, exploiting rotational symmetry
// about the axis c1 c2. Coincident centers fall back to integrate_radial.
inline QuadResult integrate_two_center(const std::function<double(double, double)>& f,
                                       const Vec& c1, const Vec& c2, const Dimension& dim,
                                       const QuadratureSpec& spec) {
    spec.validate();
    const double d = (c2 - c1).norm();
    const double w = spec.mapScale;
    if (d < 1e-14 * std::max(1.0, w)) {
        return integrate_radial([&](double r) { return f(r, r); }, dim, spec);
    }
    auto eval = [&](int un, int sn) {
        auto grid = quad::build_axial_grid(dim.n, {{0.0, w}, {d, w}}, un, sn);
        return quad::integrate_on_grid(grid, [&](double u, double s) {
            return f(std::hypot(u, s), std::hypot(u - d, s));
        });
    };
    const double v1 = eval(spec.radialNodes, spec.transverseNodes);
    const double v2 = eval(2 * spec.radialNodes, 2 * spec.transverseNodes);
    QuadResult res;
    res.value = v2;
    const double scale = std::max({std::abs(v1), std::abs(v2), 1e-300});
    res.refineDelta = std::abs(v2 - v1) / scale;
    res.converged = res.refineDelta <= spec.relTol || std::abs(v2 - v1) < 1e-300;
    return res;
}

}  // namespace bubbleforge
