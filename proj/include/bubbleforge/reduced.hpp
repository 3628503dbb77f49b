#pragma once

#include <functional>

#include "bubbleforge/correction.hpp"

namespace bubbleforge {

// Reduced-system unknowns: scales t_k (lambda_k = t_k L_eps^{1/beta_k}) and
// rescaled center offsets x^k = lambda_k (y^k - z^k).
struct ReducedPoint {
    std::array<double, 2> t{1.0, 1.0};
    std::array<Vec, 2> x;
    std::array<double, 2> m{1.0, 1.0};
    std::array<double, 2> beta{1.5, 1.5};
};

struct LEpsResult {
    double value = 0.0;
    double exponent = 0.0;
};

// L_eps = eps^{b1 b2 / [b1 b2 - (n-4)(b1+b2)/2]}
inline LEpsResult l_eps(double eps, double beta1, double beta2, const Dimension& dim) {
    const double denom = beta1 * beta2 - 0.5 * (dim.n - 4.0) * (beta1 + beta2);
    if (std::abs(denom) < 1e-14) throw std::domain_error("l_eps: degenerate balance");
    LEpsResult r;
    r.exponent = beta1 * beta2 / denom;
    r.value = std::pow(eps, r.exponent);
    return r;
}

// g_k(t1,t2) = t_k^{-beta_k} - m_k (t1 t2)^{-(n-4)/2}
inline std::array<double, 2> g_map(const std::array<double, 2>& t, const std::array<double, 2>& m,
                                   const std::array<double, 2>& beta, const Dimension& dim) {
    if (!(t[0] > 0.0 && t[1] > 0.0)) throw std::domain_error("g_map: t > 0 required");
    const double prod = std::pow(t[0] * t[1], -0.5 * (dim.n - 4.0));
    return {std::pow(t[0], -beta[0]) - m[0] * prod, std::pow(t[1], -beta[1]) - m[1] * prod};
}

struct JacG {
    std::array<std::array<double, 2>, 2> J{};
    double det = 0.0;
};

inline JacG jac_g(const std::array<double, 2>& t, const std::array<double, 2>& m,
                  const std::array<double, 2>& beta, const Dimension& dim) {
    if (!(t[0] > 0.0 && t[1] > 0.0)) throw std::domain_error("jac_g: t > 0 required");
    const double h = 0.5 * (dim.n - 4.0);
    const double prod = std::pow(t[0] * t[1], -h);
    JacG out;
    out.J[0][0] = -beta[0] * std::pow(t[0], -beta[0] - 1.0) + m[0] * h * prod / t[0];
    out.J[0][1] = m[0] * h * prod / t[1];
    out.J[1][0] = m[1] * h * prod / t[0];
    out.J[1][1] = -beta[1] * std::pow(t[1], -beta[1] - 1.0) + m[1] * h * prod / t[1];
    out.det = out.J[0][0] * out.J[1][1] - out.J[0][1] * out.J[1][0];
    return out;
}

struct UniquenessReport {
    int rootCells = 0;       // refined sign-change cells clustered by root
    int candidateCells = 0;  // coarse-grid sign-change cells
    std::array<double, 2> root{0, 0};
};

struct ReducedRoot {
    std::array<double, 2> t{0, 0};
    int newtonIterations = 0;
    double gNorm = 0.0;
    double jacDet = 0.0;
    UniquenessReport uniqueness;
};

ReducedRoot solve_reduced(const std::array<double, 2>& m, const std::array<double, 2>& beta,
                          const Dimension& dim, const std::array<double, 2>& box);

struct DegreeSample {
    double x = 0, y = 0;   // boundary point
    double f1 = 0, f2 = 0;  // map value
    double dtheta = 0;      // wrapped angular increment to the next sample
};

struct DegreeResult {
    int degree = 0;
    double totalWinding = 0.0;     // must be within 1e-6 of 2 pi degree
    double minBoundaryNorm = 0.0;
    std::vector<DegreeSample> certificate;
};

using PlaneMap = std::function<std::array<double, 2>(double, double)>;

// Brouwer degree by boundary winding on the rectangle [x0,x1]x[y0,y1], with
// adaptive refinement wherever an angular increment exceeds pi/2.
DegreeResult brouwer_degree(const PlaneMap& map, const std::array<double, 4>& box, int gridRes,
                            double normFloor = 1e-10);

// Gradient source for the full reduced system: returns the normalized residual
// (2 scale equations followed by 2n offset equations).
class ReducedSystemSource {
public:
    virtual ~ReducedSystemSource() = default;
    virtual Eigen::VectorXd residual(const std::array<double, 2>& t,
                                     const std::array<Vec, 2>& x) = 0;
    virtual int n() const = 0;
    virtual int axisIndex() const { return 0; }  // separation direction in original axes
};

// two-term model: residual_t = sum(a) g_k(t), residual_x = x
class ModelReducedSource : public ReducedSystemSource {
public:
    ModelReducedSource(const Dimension& dim, const ExpansionModel& model,
                       std::array<double, 2> sumA, std::array<double, 2> beta)
        : dim_(dim), model_(model), sumA_(sumA), beta_(beta) {}
    Eigen::VectorXd residual(const std::array<double, 2>& t, const std::array<Vec, 2>& x) override;
    int n() const override { return dim_.n; }

private:
    Dimension dim_;
    ExpansionModel model_;
    std::array<double, 2> sumA_, beta_;
};

// full source: Lyapunov-Schmidt correction plus exact reduced gradients
class FullReducedSource : public ReducedSystemSource {
public:
    FullReducedSource(const Dimension& dim, const KProfile& p1, const KProfile& p2, double eps,
                      const ExpansionModel& model, const QuadratureSpec& spec);
    Eigen::VectorXd residual(const std::array<double, 2>& t, const std::array<Vec, 2>& x) override;
    int n() const override { return dim_.n; }
    int axisIndex() const override;
    const CorrectionSolution& lastSolution() const { return lastSol_; }
    std::array<double, 2> lambdasFor(const std::array<double, 2>& t) const;

private:
    Dimension dim_;
    CompositeK K_;
    double eps_;
    ExpansionModel model_;
    QuadratureSpec spec_;
    LEpsResult L_;
    CorrectionSolution lastSol_;
};

struct FullReducedResult {
    ReducedPoint point;
    int newtonIterations = 0;
    double residNorm = 0.0;
    std::array<double, 2> lambdas{0, 0};
};

// Newton with backtracking on the chosen source; offsets enter through their
// axial components (symmetry-null transverse columns use the model identity).
FullReducedResult solve_full_reduced(ReducedSystemSource& source, const Dimension& dim,
                                     const std::array<double, 2>& tBox, double deltaBox,
                                     const std::array<double, 2>& tStart);

}  // namespace bubbleforge
