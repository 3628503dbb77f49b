#include "bubbleforge/reduced.hpp"

#include <Eigen/LU>

#include <sstream>

namespace bubbleforge {

ReducedRoot solve_reduced(const std::array<double, 2>& m, const std::array<double, 2>& beta,
                          const Dimension& dim, const std::array<double, 2>& box) {
    const double g1 = box[0], g2 = box[1];
    if (!(g1 > 0.0 && g2 > g1)) throw std::invalid_argument("solve_reduced: bad box");

    // Newton with backtracking from the symmetric initial guess
    std::array<double, 2> t{std::sqrt(g1 * g2), std::sqrt(g1 * g2)};
    auto norm2 = [&](const std::array<double, 2>& g) { return std::hypot(g[0], g[1]); };
    ReducedRoot out;
    double gn = norm2(g_map(t, m, beta, dim));
    for (int it = 0; it < 200 && gn > 1e-13; ++it) {
        const auto g = g_map(t, m, beta, dim);
        const auto J = jac_g(t, m, beta, dim);
        const double det = J.det;
        if (std::abs(det) < 1e-300) throw std::runtime_error("solve_reduced: singular Jacobian");
        const double dx0 = (g[0] * J.J[1][1] - g[1] * J.J[0][1]) / det;
        const double dx1 = (J.J[0][0] * g[1] - J.J[1][0] * g[0]) / det;
        double step = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
            std::array<double, 2> trial{t[0] - step * dx0, t[1] - step * dx1};
            if (trial[0] > 0.0 && trial[1] > 0.0) {
                const double gn2 = norm2(g_map(trial, m, beta, dim));
                if (gn2 < gn) {
                    t = trial;
                    gn = gn2;
                    break;
                }
            }
            step *= 0.5;
        }
        out.newtonIterations = it + 1;
    }
    if (gn > 1e-12) throw std::runtime_error("solve_reduced: Newton did not reach |g| <= 1e-12");
    if (!(t[0] > g1 && t[0] < g2 && t[1] > g1 && t[1] < g2))
        throw std::runtime_error("solve_reduced: root is not interior to the box");

    // uniqueness certificate: coarse sign-change scan, refined per cell
    const int N = 64;
    int candidates = 0, rootCells = 0;
    std::ostringstream dump;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double a0 = g1 + (g2 - g1) * i / N, a1 = g1 + (g2 - g1) * (i + 1) / N;
            const double b0 = g1 + (g2 - g1) * j / N, b1 = g1 + (g2 - g1) * (j + 1) / N;
            bool pos0 = false, neg0 = false, pos1 = false, neg1 = false;
            for (double ta : {a0, a1})
                for (double tb : {b0, b1}) {
                    const auto g = g_map({ta, tb}, m, beta, dim);
                    (g[0] >= 0 ? pos0 : neg0) = true;
                    (g[1] >= 0 ? pos1 : neg1) = true;
                }
            if (pos0 && neg0 && pos1 && neg1) {
                ++candidates;
                // refine: does the cell actually contain the Newton root?
                bool containsRoot = t[0] >= a0 - 1e-12 && t[0] <= a1 + 1e-12 &&
                                    t[1] >= b0 - 1e-12 && t[1] <= b1 + 1e-12;
                if (!containsRoot) {
                    // fine subgrid: both components must still change sign somewhere
                    bool fp0 = false, fn0 = false, fp1 = false, fn1 = false;
                    const int R = 8;
                    for (int ii = 0; ii <= R; ++ii)
                        for (int jj = 0; jj <= R; ++jj) {
                            const auto g = g_map({a0 + (a1 - a0) * ii / R, b0 + (b1 - b0) * jj / R},
                                                 m, beta, dim);
                            (g[0] >= 0 ? fp0 : fn0) = true;
                            (g[1] >= 0 ? fp1 : fn1) = true;
                        }
                    containsRoot = fp0 && fn0 && fp1 && fn1;
                }
                if (containsRoot) {
                    ++rootCells;
                    dump << " cell(" << a0 << "," << b0 << ")";
                }
            }
        }
    // neighbouring cells sharing the root are one cluster
    if (rootCells == 0)
        throw std::runtime_error("solve_reduced: no root cell in the scan; grid dump:" + dump.str());
    if (rootCells > 4)
        throw std::runtime_error("solve_reduced: multiple root cells; grid dump:" + dump.str());

    out.t = t;
    out.gNorm = gn;
    out.jacDet = jac_g(t, m, beta, dim).det;
    out.uniqueness = {rootCells, candidates, t};
    return out;
}

namespace {

double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

}  // namespace

DegreeResult brouwer_degree(const PlaneMap& map, const std::array<double, 4>& box, int gridRes,
                            double normFloor) {
    const double x0 = box[0], x1 = box[1], y0 = box[2], y1 = box[3];
    if (!(x1 > x0 && y1 > y0)) throw std::invalid_argument("brouwer_degree: bad box");
    // positively oriented boundary polygon, parameter in [0, 4)
    auto point = [&](double q) -> std::array<double, 2> {
        const int side = static_cast<int>(q) % 4;
        const double f = q - std::floor(q);
        switch (side) {
            case 0: return {x0 + (x1 - x0) * f, y0};
            case 1: return {x1, y0 + (y1 - y0) * f};
            case 2: return {x1 - (x1 - x0) * f, y1};
            default: return {x0, y1 - (y1 - y0) * f};
        }
    };

    DegreeResult out;
    out.minBoundaryNorm = std::numeric_limits<double>::infinity();
    auto sample = [&](double q) {
        const auto xy = point(q);
        const auto F = map(xy[0], xy[1]);
        const double norm = std::hypot(F[0], F[1]);
        out.minBoundaryNorm = std::min(out.minBoundaryNorm, norm);
        if (norm < normFloor)
            throw std::runtime_error("brouwer_degree: degree undefined on this box (boundary zero)");
        return std::pair<std::array<double, 2>, double>{F, std::atan2(F[1], F[0])};
    };

    double total = 0.0;
    std::function<void(double, double, double, double, std::array<double, 2>, int)> refine =
        [&](double qa, double qb, double tha, double thb, std::array<double, 2> Fa, int depth) {
            const double d = wrap_angle(thb - tha);
            if (std::abs(d) <= M_PI / 2.0 || depth >= 48) {
                const auto xy = point(qa);
                out.certificate.push_back({xy[0], xy[1], Fa[0], Fa[1], d});
                total += d;
                return;
            }
            const double qm = 0.5 * (qa + qb);
            const auto [Fm, thm] = sample(qm);
            refine(qa, qm, tha, thm, Fa, depth + 1);
            refine(qm, qb, thm, thb, Fm, depth + 1);
        };

    const int M = 4 * std::max(4, gridRes);
    std::vector<double> qs(M + 1);
    for (int i = 0; i <= M; ++i) qs[i] = 4.0 * i / M;
    auto [Fprev, thprev] = sample(qs[0]);
    for (int i = 0; i < M; ++i) {
        auto [Fnext, thnext] = sample(qs[i + 1]);
        refine(qs[i], qs[i + 1], thprev, thnext, Fprev, 0);
        Fprev = Fnext;
        thprev = thnext;
    }
    out.totalWinding = total;
    out.degree = static_cast<int>(std::lround(total / (2.0 * M_PI)));
    if (std::abs(total / (2.0 * M_PI) - out.degree) > 1e-6)
        throw std::runtime_error("brouwer_degree: winding sum failed to close");
    return out;
}

Eigen::VectorXd ModelReducedSource::residual(const std::array<double, 2>& t,
                                             const std::array<Vec, 2>& x) {
    const auto g = g_map(t, model_.mk, beta_, dim_);
    Eigen::VectorXd r(2 + 2 * dim_.n);
    r[0] = sumA_[0] * g[0];
    r[1] = sumA_[1] * g[1];
    for (int k = 0; k < 2; ++k) r.segment(2 + k * dim_.n, dim_.n) = x[k];
    return r;
}

FullReducedSource::FullReducedSource(const Dimension& dim, const KProfile& p1, const KProfile& p2,
                                     double eps, const ExpansionModel& model,
                                     const QuadratureSpec& spec)
    : dim_(dim), K_(p1, p2), eps_(eps), model_(model), spec_(spec),
      L_(l_eps(eps, p1.beta(), p2.beta(), dim)) {}

std::array<double, 2> FullReducedSource::lambdasFor(const std::array<double, 2>& t) const {
    return {t[0] * std::pow(L_.value, 1.0 / K_.profile(0).beta()),
            t[1] * std::pow(L_.value, 1.0 / K_.profile(1).beta())};
}

int FullReducedSource::axisIndex() const {
    const Vec diff = K_.profile(1).z() - K_.profile(0).z();
    int best = 0;
    for (int i = 1; i < diff.size(); ++i)
        if (std::abs(diff[i]) > std::abs(diff[best])) best = i;
    return best;
}

Eigen::VectorXd FullReducedSource::residual(const std::array<double, 2>& t,
                                            const std::array<Vec, 2>& x) {
    const int n = dim_.n;
    const auto lam = lambdasFor(t);
    std::array<Vec, 2> y{K_.profile(0).z() + x[0] / lam[0], K_.profile(1).z() + x[1] / lam[1]};
    GalerkinSpace space(dim_, {y[0], y[1]}, {lam[0], lam[1]}, DictSpec{}, spec_);
    CorrectionProblem prob(space, eps_, K_, spec_);
    lastSol_ = solve_correction(prob);
    const ReducedGradients rg = reduced_gradients(prob, lastSol_, &model_);

    Eigen::VectorXd r(2 + 2 * n);
    for (int k = 0; k < 2; ++k) {
        const double beta = K_.profile(k).beta();
        const double scaleT = eps_ * model_.cNbeta[k] / L_.value;  // eps c_{N,beta} L^{-1}
        r[k] = lam[k] * rg.residLambda[k] / scaleT;
        const double scaleX = eps_ * model_.dNbeta[k] * std::pow(lam[k], 1.0 - beta) *
                              std::abs(K_.profile(k).a()[axisIndex()]);
        const Vec rOrig = space.frame() * rg.residCenter[k];
        r.segment(2 + k * n, n) = rOrig / scaleX;
    }
    return r;
}

FullReducedResult solve_full_reduced(ReducedSystemSource& source, const Dimension& dim,
                                     const std::array<double, 2>& tBox, double deltaBox,
                                     const std::array<double, 2>& tStart) {
    const int n = source.n();
    const int dimw = 2 + 2 * n;
    Eigen::VectorXd u(dimw);
    u[0] = tStart[0];
    u[1] = tStart[1];
    u.tail(2 * n).setZero();

    auto unpack = [&](const Eigen::VectorXd& v, std::array<double, 2>& t, std::array<Vec, 2>& x) {
        t = {v[0], v[1]};
        x = {v.segment(2, n), v.segment(2 + n, n)};
    };

    std::array<double, 2> t;
    std::array<Vec, 2> x;
    unpack(u, t, x);
    Eigen::VectorXd r = source.residual(t, x);
    double rn = r.norm();
    FullReducedResult out;

    for (int it = 0; it < 30 && rn > 1e-9; ++it) {
        // finite-difference Jacobian in t and the axial offset components;
        // symmetry-null transverse offset columns keep the model identity
        Eigen::MatrixXd J = Eigen::MatrixXd::Identity(dimw, dimw);
        const int ax = source.axisIndex();
        const std::vector<int> fdCols{0, 1, 2 + ax, 2 + n + ax};
        for (int c : fdCols) {
            Eigen::VectorXd up = u;
            const double h = std::max(1e-5, 1e-4 * std::abs(u[c]));
            up[c] += h;
            std::array<double, 2> tp;
            std::array<Vec, 2> xp;
            unpack(up, tp, xp);
            if (!(tp[0] > 0 && tp[1] > 0)) continue;
            J.col(c) = (source.residual(tp, xp) - r) / h;
        }
        const Eigen::VectorXd step = J.fullPivLu().solve(r);
        const double rnPrev = rn;
        bool moved = false;
        double sfac = 1.0;
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::VectorXd trial = u - sfac * step;
            std::array<double, 2> tt;
            std::array<Vec, 2> xt;
            unpack(trial, tt, xt);
            const bool inBox = tt[0] > tBox[0] && tt[0] < tBox[1] && tt[1] > tBox[0] &&
                               tt[1] < tBox[1] && xt[0].norm() <= deltaBox &&
                               xt[1].norm() <= deltaBox;
            if (inBox) {
                const Eigen::VectorXd rt = source.residual(tt, xt);
                if (rt.norm() < rn) {
                    u = trial;
                    r = rt;
                    rn = r.norm();
                    moved = true;
                    break;
                }
            }
            sfac *= 0.5;
        }
        out.newtonIterations = it + 1;
        if (!moved || rn > 0.9 * rnPrev) {
            // stalled at the quadrature/MC noise floor, or no admissible step
            if (rn < 1e-2) break;
            if (!moved)
                throw std::runtime_error(
                    "solve_full_reduced: Newton diverged; residual norm " + std::to_string(rn));
        }
    }
    unpack(u, out.point.t, out.point.x);
    out.residNorm = rn;
    return out;
}

}  // namespace bubbleforge
