#include "bubbleforge/correction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <sstream>

namespace bubbleforge {

namespace {

// |x|^{p-1} x, with a multiply chain when p is a small integer (n = 6, 8)
inline double spow(double x, double p) {
    const int ip = static_cast<int>(p);
    if (ip == p && ip >= 1 && ip <= 9) {
        double ax = std::abs(x), r = 1.0;
        for (int i = 0; i < ip; ++i) r *= ax;
        return x < 0.0 ? -r : r;
    }
    return x < 0.0 ? -std::pow(-x, p) : std::pow(x, p);
}

inline double ppow(double x, double p) {  // x > 0
    const int ip = static_cast<int>(p);
    if (ip == p && ip >= 1 && ip <= 9) {
        double r = 1.0;
        for (int i = 0; i < ip; ++i) r *= x;
        return r;
    }
    return std::pow(x, p);
}

}  // namespace

CorrectionProblem::CorrectionProblem(const GalerkinSpace& space, double eps, const CompositeK& K,
                                     const QuadratureSpec& spec)
    : space_(space), eps_(eps), K_(K), spec_(spec) {
    const Dimension& dim = space_.dim();
    alphaHat_ = {alpha_hat(dim, eps, K.profile(0)), alpha_hat(dim, eps, K.profile(1))};
    if (space_.singleBubble()) alphaHat_[1] = 0.0;

    const auto& g = space_.grid();
    const auto ng = static_cast<Eigen::Index>(g.w.size());
    Ug0_.resize(ng);
    Ug1_.resize(ng);
    for (Eigen::Index i = 0; i < ng; ++i) {
        Ug0_[i] = space_.bubbleValueOnGrid(0, g.u[i], g.s[i]);
        Ug1_[i] = space_.singleBubble() ? 0.0 : space_.bubbleValueOnGrid(1, g.u[i], g.s[i]);
    }

    // MC batch: antithetic pairs from the two-bubble importance mixture
    const Dimension& d = dim;
    BubbleMixture mix(d, space_.bubble(0), space_.bubble(space_.singleBubble() ? 0 : 1));
    Rng rng(spec_.seed, 17);
    const Eigen::Index pairs = std::max<long long>(spec_.mcSamples / 2, 16);
    X_.resize(d.n, pairs);
    Xr_.resize(d.n, pairs);
    invQ_.resize(pairs);
    Kx_.resize(pairs);
    Kxr_.resize(pairs);
    const Vec c = mix.midpoint();
    for (Eigen::Index i = 0; i < pairs; ++i) {
        const Vec x = mix.sample(rng);
        X_.col(i) = x;
        Xr_.col(i) = 2.0 * c - x;
        invQ_[i] = 1.0 / mix.pdf(x);
        Kx_[i] = K_.value(X_.col(i));
        Kxr_[i] = K_.value(Xr_.col(i));
    }
    const int nd = static_cast<int>(space_.dictionary().size());
    Phi_.resize(nd, pairs);
    Phir_.resize(nd, pairs);
    U0x_.resize(pairs);
    U1x_.resize(pairs);
    U0xr_.resize(pairs);
    U1xr_.resize(pairs);
    for (Eigen::Index i = 0; i < pairs; ++i) {
        const Vec x = X_.col(i), xr = Xr_.col(i);
        for (int a = 0; a < nd; ++a) {
            Phi_(a, i) = space_.evalEntry(a, x);
            Phir_(a, i) = space_.evalEntry(a, xr);
        }
        U0x_[i] = bubble_value(d, space_.bubble(0), x);
        U0xr_[i] = bubble_value(d, space_.bubble(0), xr);
        U1x_[i] = space_.singleBubble() ? 0.0 : bubble_value(d, space_.bubble(1), x);
        U1xr_[i] = space_.singleBubble() ? 0.0 : bubble_value(d, space_.bubble(1), xr);
    }

    // quadratic-form weight matrices at alphaHat
    const double p = d.p();
    const Eigen::ArrayXd Bhat = alphaHat_[0] * Ug0_ + alphaHat_[1] * Ug1_;
    Eigen::ArrayXd field(ng);
    for (Eigen::Index i = 0; i < ng; ++i) field[i] = ppow(Bhat[i], p - 1.0);
    Wpure_ = space_.pairAll(field);

    Eigen::ArrayXd wx(pairs), wxr(pairs);
    for (Eigen::Index i = 0; i < pairs; ++i) {
        const double bx = alphaHat_[0] * U0x_[i] + alphaHat_[1] * U1x_[i];
        const double bxr = alphaHat_[0] * U0xr_[i] + alphaHat_[1] * U1xr_[i];
        wx[i] = 0.5 * invQ_[i] * eps_ * Kx_[i] * ppow(bx, p - 1.0) / pairs;
        wxr[i] = 0.5 * invQ_[i] * eps_ * Kxr_[i] * ppow(bxr, p - 1.0) / pairs;
    }
    Wmc_ = Phi_ * wx.matrix().asDiagonal() * Phi_.transpose() +
           Phir_ * wxr.matrix().asDiagonal() * Phir_.transpose();
    Wmc_ = 0.5 * (Wmc_ + Wmc_.transpose()).eval();
    W_ = Wpure_ + Wmc_;

    // Q on (alphaBar, v): alpha block, cross block, projected v block
    const auto& P = space_.projectedBasis();
    const int K2 = space_.projectedDim();
    const int nb = space_.nBubbles();
    Q_ = Eigen::MatrixXd::Zero(2 + K2, 2 + K2);
    for (int k = 0; k < nb; ++k)
        for (int l = 0; l < nb; ++l) {
            const int ak = space_.indexValue(k), al = space_.indexValue(l);
            Q_(k, l) = rawGram(ak, al) - p * W_(ak, al) /
                                             (space_.dictionary()[ak].normalization *
                                              space_.dictionary()[al].normalization);
        }
    if (space_.singleBubble()) Q_(1, 1) = 1.0;  // inert slot
    for (int k = 0; k < nb; ++k) {
        const int ak = space_.indexValue(k);
        const Eigen::VectorXd row = W_.row(ak) / space_.dictionary()[ak].normalization;
        Q_.block(k, 2, 1, K2) = -p * (row.transpose() * P);
        Q_.block(2, k, K2, 1) = Q_.block(k, 2, 1, K2).transpose();
    }
    Q_.block(2, 2, K2, K2) =
        Eigen::MatrixXd::Identity(K2, K2) - p * P.transpose() * W_ * P;

    f_ = gradient(Eigen::VectorXd::Zero(2 + K2));
}

double CorrectionProblem::rawGram(int a, int b) const {
    return space_.gram()(a, b) / (space_.dictionary()[a].normalization *
                                  space_.dictionary()[b].normalization);
}

Eigen::VectorXd CorrectionProblem::integrateAgainstDictionary(
    const std::array<double, 2>& alpha, const Eigen::VectorXd& dictCoefOfV) const {
    const Dimension& dim = space_.dim();
    const double p = dim.p();
    const auto& g = space_.grid();
    const auto ng = static_cast<Eigen::Index>(g.w.size());

    // deterministic pure-bubble part
    Eigen::ArrayXd field(ng);
    for (Eigen::Index i = 0; i < ng; ++i)
        field[i] = ppow(alpha[0] * Ug0_[i] + alpha[1] * Ug1_[i], p);
    Eigen::VectorXd out = space_.pairAgainstScalar(field);

    // everything else (K-weighted and v-coupled) on the fixed MC batch
    const Eigen::Index pairs = invQ_.size();
    const Eigen::VectorXd vx = Phi_.transpose() * dictCoefOfV;
    const Eigen::VectorXd vxr = Phir_.transpose() * dictCoefOfV;
    Eigen::ArrayXd gx(pairs), gxr(pairs);
    for (Eigen::Index i = 0; i < pairs; ++i) {
        const double bx = alpha[0] * U0x_[i] + alpha[1] * U1x_[i];
        const double bxr = alpha[0] * U0xr_[i] + alpha[1] * U1xr_[i];
        const double ux = bx + vx[i];
        const double uxr = bxr + vxr[i];
        gx[i] = 0.5 * invQ_[i] * ((1.0 + eps_ * Kx_[i]) * spow(ux, p) - ppow(bx, p)) / pairs;
        gxr[i] = 0.5 * invQ_[i] * ((1.0 + eps_ * Kxr_[i]) * spow(uxr, p) - ppow(bxr, p)) / pairs;
    }
    out += Phi_ * gx.matrix() + Phir_ * gxr.matrix();
    return out;
}

Eigen::VectorXd CorrectionProblem::gradient(const Eigen::VectorXd& omega) const {
    const int K2 = space_.projectedDim();
    const int nb = space_.nBubbles();
    const std::array<double, 2> alpha{alphaHat_[0] + omega[0],
                                      space_.singleBubble() ? 0.0 : alphaHat_[1] + omega[1]};
    const Eigen::VectorXd c = omega.tail(K2);
    const Eigen::VectorXd dcoef = space_.projectedBasis() * c;
    const Eigen::VectorXd I = integrateAgainstDictionary(alpha, dcoef);

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 + K2);
    for (int k = 0; k < nb; ++k) {
        const int ak = space_.indexValue(k);
        double inner = 0.0;
        for (int j = 0; j < nb; ++j) inner += alpha[j] * rawGram(space_.indexValue(j), ak);
        grad[k] = inner - I[ak] / space_.dictionary()[ak].normalization;
    }
    grad.tail(K2) = c - space_.projectedBasis().transpose() * I;
    return grad;
}

Eigen::VectorXd CorrectionProblem::dictionaryDefect(const Eigen::VectorXd& omega) const {
    const int K2 = space_.projectedDim();
    const int nb = space_.nBubbles();
    const std::array<double, 2> alpha{alphaHat_[0] + omega[0],
                                      space_.singleBubble() ? 0.0 : alphaHat_[1] + omega[1]};
    const Eigen::VectorXd dcoef = space_.projectedBasis() * omega.tail(K2);
    const Eigen::VectorXd I = integrateAgainstDictionary(alpha, dcoef);
    Eigen::VectorXd d = space_.gram() * dcoef;  // <v, phi_a>
    for (int j = 0; j < nb; ++j) {
        const int aj = space_.indexValue(j);
        d += (alpha[j] / space_.dictionary()[aj].normalization) * space_.gram().row(aj).transpose();
    }
    return d - I;
}

double CorrectionProblem::mcKWeightedLinear(const Eigen::VectorXd& dictCoef) const {
    const double p = space_.dim().p();
    const Eigen::Index pairs = invQ_.size();
    const Eigen::VectorXd vx = Phi_.transpose() * dictCoef;
    const Eigen::VectorXd vxr = Phir_.transpose() * dictCoef;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pairs; ++i) {
        const double bx = alphaHat_[0] * U0x_[i] + alphaHat_[1] * U1x_[i];
        const double bxr = alphaHat_[0] * U0xr_[i] + alphaHat_[1] * U1xr_[i];
        acc += 0.5 * invQ_[i] *
               (Kx_[i] * ppow(bx, p) * vx[i] + Kxr_[i] * ppow(bxr, p) * vxr[i]);
    }
    return acc / pairs;
}

double CorrectionProblem::weightedAgainstEntry(int idx, const Eigen::VectorXd& dictCoef) const {
    return W_.row(idx).dot(dictCoef) / space_.dictionary()[idx].normalization;
}

std::array<std::array<double, 2>, 2> CorrectionProblem::alphaBlock() const {
    std::array<std::array<double, 2>, 2> blk{};
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) blk[k][l] = Q_(k, l);
    return blk;
}

double CorrectionProblem::energy(const std::array<double, 2>& alpha,
                                 const Eigen::VectorXd& vCoeffs) const {
    const Dimension& dim = space_.dim();
    const double p = dim.p();
    const int nb = space_.nBubbles();
    double norm2 = vCoeffs.squaredNorm();
    for (int j = 0; j < nb; ++j)
        for (int k = 0; k < nb; ++k)
            norm2 += alpha[j] * alpha[k] * rawGram(space_.indexValue(j), space_.indexValue(k));

    const auto& g = space_.grid();
    const auto ng = static_cast<Eigen::Index>(g.w.size());
    Eigen::ArrayXd field(ng);
    for (Eigen::Index i = 0; i < ng; ++i)
        field[i] = ppow(alpha[0] * Ug0_[i] + alpha[1] * Ug1_[i], p + 1.0);
    double nl = space_.gridSum(field);

    const Eigen::VectorXd dcoef = space_.projectedBasis() * vCoeffs;
    const Eigen::VectorXd vx = Phi_.transpose() * dcoef;
    const Eigen::VectorXd vxr = Phir_.transpose() * dcoef;
    const Eigen::Index pairs = invQ_.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pairs; ++i) {
        const double bx = alpha[0] * U0x_[i] + alpha[1] * U1x_[i];
        const double bxr = alpha[0] * U0xr_[i] + alpha[1] * U1xr_[i];
        const double ux = std::abs(bx + vx[i]);
        const double uxr = std::abs(bxr + vxr[i]);
        acc += 0.5 * invQ_[i] *
               ((1.0 + eps_ * Kx_[i]) * ppow(ux, p + 1.0) - ppow(bx, p + 1.0) +
                (1.0 + eps_ * Kxr_[i]) * ppow(uxr, p + 1.0) - ppow(bxr, p + 1.0));
    }
    nl += acc / pairs;
    return 0.5 * norm2 - nl / dim.twoStar;
}

void lagrange_multipliers(const CorrectionProblem& prob, CorrectionSolution& sol) {
    const GalerkinSpace& sp = prob.space();
    const Dimension& dim = sp.dim();
    const int n = dim.n;
    const int nb = sp.nBubbles();
    const int K2 = sp.projectedDim();
    Eigen::VectorXd omega(2 + K2);
    omega[0] = sol.alphaBar[0];
    omega[1] = sol.alphaBar[1];
    omega.tail(K2) = sol.vCoeffs;
    const Eigen::VectorXd defect = prob.dictionaryDefect(omega);

    const auto& con = sp.constraintIndices();
    const int nc = static_cast<int>(con.size());
    Eigen::MatrixXd M(nc, nc);
    Eigen::VectorXd rhs(nc);
    for (int i = 0; i < nc; ++i) {
        rhs[i] = defect[con[i]] / sp.dictionary()[con[i]].normalization;
        for (int j = 0; j < nc; ++j) M(i, j) = prob.rawGram(con[i], con[j]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
        throw std::runtime_error("lagrange_multipliers: singular test system (broken Gram)");
    const Eigen::VectorXd coef = lu.solve(rhs);
    for (int j = 0; j < nb; ++j) {
        const int base = j * (n + 2);
        sol.multA[j] = coef[base];
        sol.multB[j] = coef[base + 1];
        Vec cFrame(n);
        for (int a = 0; a < n; ++a) cFrame[a] = coef[base + 2 + a];
        sol.multC[j] = sp.frame() * cFrame;
    }
}

CorrectionSolution solve_correction(const GalerkinSpace& space, double eps, const CompositeK& K,
                                    const QuadratureSpec& spec) {
    CorrectionProblem prob(space, eps, K, spec);
    return solve_correction(prob);
}

CorrectionSolution solve_correction(const CorrectionProblem& prob) {
    const GalerkinSpace& space = prob.space();
    const int dimw = prob.omegaDim();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(prob.quadraticForm());
    if (!lu.isInvertible()) throw std::runtime_error("solve_correction: Q_eps not invertible");

    Eigen::VectorXd omega = Eigen::VectorXd::Zero(dimw);
    std::vector<double> steps;
    int growth = 0;
    int iter = 0;
    for (; iter < 50; ++iter) {
        const Eigen::VectorXd next = omega - lu.solve(prob.gradient(omega));
        const double step = (next - omega).norm();
        steps.push_back(step);
        omega = next;
        if (step < 1e-10 * std::max(1.0, omega.norm())) {
            ++iter;
            break;
        }
        if (steps.size() >= 2 && step > steps[steps.size() - 2]) {
            if (++growth >= 3) {
                std::ostringstream os;
                os << "solve_correction: divergent fixed point; step trace:";
                for (double s : steps) os << " " << s;
                throw std::runtime_error(os.str());
            }
        } else {
            growth = 0;
        }
    }

    CorrectionSolution sol;
    sol.alphaHat = prob.alphaHat();
    sol.alphaBar = {omega[0], omega[1]};
    sol.vCoeffs = omega.tail(space.projectedDim());
    sol.vNorm = sol.vCoeffs.norm();
    sol.iterations = iter;
    sol.stepNorms = std::move(steps);
    sol.residualNorm = prob.gradient(omega).norm();
    sol.fNorm = prob.linearForm().norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prob.quadraticForm());
    sol.qInvNorm = 1.0 / es.eigenvalues().cwiseAbs().minCoeff();
    sol.multC = {Vec::Zero(space.dim().n), Vec::Zero(space.dim().n)};
    lagrange_multipliers(prob, sol);
    return sol;
}

double energy_value(const GalerkinSpace& space, const std::array<double, 2>& alpha,
                    const Eigen::VectorXd& vCoeffs, double eps, const CompositeK& K,
                    const QuadratureSpec& spec) {
    CorrectionProblem prob(space, eps, K, spec);
    return prob.energy(alpha, vCoeffs);
}

}  // namespace bubbleforge
