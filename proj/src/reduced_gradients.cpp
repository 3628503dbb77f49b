#include "bubbleforge/correction.hpp"

namespace bubbleforge {

namespace {

inline double spow(double x, double p) {
    const int ip = static_cast<int>(p);
    if (ip == p && ip >= 1 && ip <= 9) {
        double ax = std::abs(x), r = 1.0;
        for (int i = 0; i < ip; ++i) r *= ax;
        return x < 0.0 ? -r : r;
    }
    return x < 0.0 ? -std::pow(-x, p) : std::pow(x, p);
}

inline double ppow(double x, double p) {
    const int ip = static_cast<int>(p);
    if (ip == p && ip >= 1 && ip <= 9) {
        double r = 1.0;
        for (int i = 0; i < ip; ++i) r *= x;
        return r;
    }
    return std::pow(x, p);
}

}  // namespace

// Term-by-term assembly of dJ/dlambda_k and dJ/dy_i^k: every contribution is
// integrated at its own scale so the leading K-term and interaction term stay
// resolvable at large lambda. The anisotropic K weight reduces exactly to the
// (u, s) plane through transverse sphere moments whenever the separation axis
// is a coordinate axis and all centers sit on it; otherwise the K term rides
// the MC batch.
struct ReducedGradientWork {
    const CorrectionProblem& prob;
    const CorrectionSolution& sol;
    const GalerkinSpace& sp;
    const Dimension& dim;
    std::array<double, 2> alpha;
    Eigen::VectorXd dcoef;
    Eigen::ArrayXd Bp;       // B^p on the master grid
    Eigen::VectorXd tPure;   // int B^p phi_a
    bool admissible = false;
    int axisOriginal = -1;   // original coordinate axis carried to frame axis 0
    double axisSign = 1.0;

    ReducedGradientWork(const CorrectionProblem& pr, const CorrectionSolution& so)
        : prob(pr), sol(so), sp(pr.space()), dim(sp.dim()) {
        alpha = {sol.alphaHat[0] + sol.alphaBar[0], sol.alphaHat[1] + sol.alphaBar[1]};
        if (sp.singleBubble()) alpha[1] = 0.0;
        dcoef = sp.projectedBasis() * sol.vCoeffs;
        const auto ng = static_cast<Eigen::Index>(sp.grid().w.size());
        Bp.resize(ng);
        const double p = dim.p();
        for (Eigen::Index i = 0; i < ng; ++i)
            Bp[i] = ppow(alpha[0] * prob.Ug0_[i] + alpha[1] * prob.Ug1_[i], p);
        tPure = sp.pairAgainstScalar(Bp);
        detectAdmissible();
    }

    void detectAdmissible() {
        const auto& F = sp.frame();
        admissible = true;
        for (int i = 0; i < F.rows() && admissible; ++i)
            for (int j = 0; j < F.cols(); ++j) {
                const double a = std::abs(F(i, j));
                if (a > 1e-12 && std::abs(a - 1.0) > 1e-12) {
                    admissible = false;
                    break;
                }
            }
        if (admissible) {
            for (int i = 0; i < F.rows(); ++i)
                if (std::abs(F(i, 0)) > 0.5) {
                    axisOriginal = i;
                    axisSign = F(i, 0) > 0 ? 1.0 : -1.0;
                }
            for (int j = 0; j < prob.K_.profileCount() && admissible; ++j) {
                const Vec zf = sp.toFrame(prob.K_.profile(j).z());
                if (zf.tail(dim.n - 1).cwiseAbs().maxCoeff() >
                    1e-10 * std::max(1.0, sp.separation()))
                    admissible = false;
            }
        }
    }

    double rawBubble(int j, double u, double s) const { return sp.bubbleValueOnGrid(j, u, s); }

    // transverse-averaged local bump (K_j - K0_j) at (u, s)
    double bumpUS(int j, double u, double s) const {
        const KProfile& pf = prob.K_.profile(j);
        const double beta = pf.beta(), r0 = pf.r0();
        const double zA = sp.toFrame(pf.z())[0];
        const double du = u - zA;
        const double r = std::hypot(du, s);
        if (r >= 2.0 * r0) return 0.0;
        const double aAxial = pf.a()[axisOriginal];
        const double sumPerp = pf.sumA() - aAxial;
        const double sm = sphere_moment_d(dim.n - 1, beta);
        if (r <= r0)
            return aAxial * std::pow(std::abs(du), beta) + sm * sumPerp * std::pow(s, beta);
        const double t = (r - r0) / r0;
        const double wgt = 1.0 - t * t * (3.0 - 2.0 * t);
        const double cosA = std::abs(du) / r, sinA = s / r;
        return wgt * std::pow(r0, beta) *
               (aAxial * std::pow(cosA, beta) + sm * sumPerp * std::pow(sinA, beta));
    }

    double backgroundU(double u) const {
        const double k0 = prob.K_.profile(0).K0(), k1 = prob.K_.profile(1).K0();
        if (k0 == k1 || sp.singleBubble()) return k0;
        const double zA0 = sp.toFrame(prob.K_.profile(0).z())[0];
        const double zA1 = sp.toFrame(prob.K_.profile(1).z())[0];
        const double t = std::clamp((u - zA0) / (zA1 - zA0), 0.0, 1.0);
        return k0 + (k1 - k0) * t * t * (3.0 - 2.0 * t);
    }

    // eps * int K B^p psi for a scalar-class entry psi, fully deterministic
    double kTermDeterministic(int psiIdx) const {
        const double p = dim.p();
        const double N = sp.dictionary()[psiIdx].normalization;
        // background on the master grid
        const auto& g = sp.grid();
        const auto ng = static_cast<Eigen::Index>(g.w.size());
        double bgPart = 0.0;
        for (Eigen::Index i = 0; i < ng; ++i)
            bgPart += g.w[i] * backgroundU(g.u[i]) * Bp[i] * sp.gridValues()(psiIdx, i);
        bgPart /= N;
        // compact bumps on dedicated grids
        double bumpPart = 0.0;
        for (int j = 0; j < prob.K_.profileCount(); ++j) {
            const KProfile& pf = prob.K_.profile(j);
            const double zA = sp.toFrame(pf.z())[0];
            std::vector<quad::Interest> pts{{zA, pf.r0()}};
            for (int b = 0; b < sp.nBubbles(); ++b) {
                const double pos = b == 0 ? 0.0 : sp.separation();
                if (std::abs(pos - zA) < 4.0 * pf.r0())
                    pts.push_back({pos, 1.0 / sp.bubble(b).lambda});
            }
            auto grid = quad::build_axial_grid(dim.n, pts, prob.spec_.radialNodes / 2,
                                               prob.spec_.transverseNodes / 2);
            for (size_t i = 0; i < grid.w.size(); ++i) {
                const double u = grid.u[i], s = grid.s[i];
                const double B = alpha[0] * rawBubble(0, u, s) +
                                 (sp.singleBubble() ? 0.0 : alpha[1] * rawBubble(1, u, s));
                bumpPart += grid.w[i] * bumpUS(j, u, s) * ppow(B, p) *
                            sp.entryScalarUS(psiIdx, u, s) / N;
            }
        }
        return prob.eps_ * (bgPart + bumpPart);
    }

    // MC for the v-coupled and (if not deterministic) K-weighted remainders
    double mcRemainder(int psiIdx, bool kViaMc) const {
        const double p = dim.p();
        const double N = sp.dictionary()[psiIdx].normalization;
        const Eigen::Index pairs = prob.invQ_.size();
        const Eigen::VectorXd vx = prob.Phi_.transpose() * dcoef;
        const Eigen::VectorXd vxr = prob.Phir_.transpose() * dcoef;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < pairs; ++i) {
            auto term = [&](double U0, double U1, double K, double v, double psi) {
                const double B = alpha[0] * U0 + alpha[1] * U1;
                const double Bhat = sol.alphaHat[0] * U0 + sol.alphaHat[1] * U1;
                const double u = B + v;
                const double rho = spow(u, p) - ppow(B, p) - p * ppow(Bhat, p - 1.0) * v;
                double gval = prob.eps_ * p * K * ppow(Bhat, p - 1.0) * v +
                              (1.0 + prob.eps_ * K) * rho;
                if (kViaMc) gval += prob.eps_ * K * ppow(B, p);
                return gval * psi;
            };
            acc += 0.5 * prob.invQ_[i] *
                   (term(prob.U0x_[i], prob.U1x_[i], prob.Kx_[i], vx[i],
                         prob.Phi_(psiIdx, i) / N) +
                    term(prob.U0xr_[i], prob.U1xr_[i], prob.Kxr_[i], vxr[i],
                         prob.Phir_(psiIdx, i) / N));
        }
        return acc / pairs;
    }

    // full nonlinear integral against a raw dictionary entry
    double nlAgainstPsi(int psiIdx) const {
        const double p = dim.p();
        const double N = sp.dictionary()[psiIdx].normalization;
        const double A1 = tPure[psiIdx] / N;
        const double A3 = p * (prob.Wpure_.row(psiIdx).dot(dcoef)) / N;
        double A2 = 0.0;
        bool kViaMc = !admissible;
        if (admissible) {
            if (sp.dirClass(psiIdx) < 0)
                A2 = kTermDeterministic(psiIdx);
            // transverse-direction entries: K term vanishes by parity
        }
        return A1 + A2 + A3 + mcRemainder(psiIdx, kViaMc);
    }

    double innerWithU(int psiIdx) const {  // <u, psi> for raw psi
        const double N = sp.dictionary()[psiIdx].normalization;
        double val = (sp.gram().row(psiIdx).dot(dcoef)) / N;
        for (int j = 0; j < sp.nBubbles(); ++j)
            val += alpha[j] * prob.rawGram(sp.indexValue(j), psiIdx);
        return val;
    }

    // <d2 U_k, v> for the multiplier right-hand sides of (1.7)-(1.8)
    double secondDerivInner(int k, DTag ta, int axA, DTag tb, int axB) const {
        const double p = dim.p();
        const double m = dim.m();
        const double lam = sp.bubble(k).lambda;
        const double pos = k == 0 ? 0.0 : sp.separation();
        const auto& g = sp.grid();
        const auto ng = static_cast<Eigen::Index>(g.w.size());

        // canonical ordering: DLambda before DCenter, axial before transverse
        if (ta == DTag::DCenter && tb == DTag::DLambda) {
            std::swap(ta, tb);
            std::swap(axA, axB);
        }
        Eigen::ArrayXd field(ng);
        int cls = -1;
        for (Eigen::Index i = 0; i < ng; ++i) {
            const double du = g.u[i] - pos, s = g.s[i];
            const double r2 = du * du + s * s;
            const double T = lam * lam * r2;
            const double w = 1.0 + T;
            const double U = dim.cN * std::pow(lam, m) * std::pow(w, -m);
            const double dlU = U * (m / lam) * (1.0 - T) / w;
            const double D = (dim.n - 4) * lam * lam * U / w;  // dU/dy_i = D * dx_i
            const double d2ll =
                (m / (lam * lam)) * U * ((m - 1.0) - (2.0 * m + 4.0) * T + (m + 1.0) * T * T) /
                (w * w);
            const double E2 = 2.0 * m * lam * U * ((m + 2.0) - m * T) / (w * w);  // d2U/dl dy = E2 dx
            const double Upm1 = ppow(U, p - 1.0), Upm2 = ppow(U, p - 2.0);
            double val = 0.0;
            if (ta == DTag::DLambda && tb == DTag::DLambda) {
                val = p * ((p - 1.0) * Upm2 * dlU * dlU + Upm1 * d2ll);
            } else if (ta == DTag::DLambda && tb == DTag::DCenter) {
                const double scalar = p * ((p - 1.0) * Upm2 * dlU * D + Upm1 * E2);
                val = scalar * (axB == 0 ? du : s);
                cls = axB == 0 ? -1 : axB;
            } else {  // DCenter, DCenter
                const double G2 = 2.0 * m * lam * lam * U / (w * w);  // d2U/dy dy = G2(2(m+1)l^2 dx dx - delta w)
                if (axA == 0 && axB == 0) {
                    val = p * ((p - 1.0) * Upm2 * D * D * du * du +
                               Upm1 * G2 * (2.0 * (m + 1.0) * lam * lam * du * du - w));
                } else if (axA == 0 || axB == 0) {
                    const double scalar =
                        p * ((p - 1.0) * Upm2 * D * D + Upm1 * G2 * 2.0 * (m + 1.0) * lam * lam);
                    val = scalar * du * s;
                    cls = axA == 0 ? axB : axA;
                } else if (axA == axB) {
                    const double tf = 1.0 / (dim.n - 1.0);
                    val = p * ((p - 1.0) * Upm2 * D * D * s * s * tf +
                               Upm1 * G2 * (2.0 * (m + 1.0) * lam * lam * s * s * tf - w));
                } else {
                    return 0.0;  // distinct transverse directions
                }
            }
            field[i] = val;
        }
        const Eigen::VectorXd t =
            cls < 0 ? sp.pairAgainstScalar(field) : sp.pairAgainstClass(field, cls);
        return t.dot(dcoef);
    }
};

ReducedGradients reduced_gradients(const CorrectionProblem& prob, const CorrectionSolution& sol,
                                   const ExpansionModel* model) {
    ReducedGradientWork w(prob, sol);
    const GalerkinSpace& sp = prob.space();
    const Dimension& dim = sp.dim();
    const int n = dim.n;
    ReducedGradients out;
    out.dCenter = {Vec::Zero(n), Vec::Zero(n)};
    out.residCenter = {Vec::Zero(n), Vec::Zero(n)};

    for (int k = 0; k < sp.nBubbles(); ++k) {
        const Eigen::VectorXd cFrame = sp.frame().transpose() * sol.multC[k];

        const int idxL = sp.indexDLambda(k);
        out.dLambda[k] = w.alpha[k] * (w.innerWithU(idxL) - w.nlAgainstPsi(idxL));
        double rhs = sol.multB[k] * w.secondDerivInner(k, DTag::DLambda, 0, DTag::DLambda, 0);
        for (int l = 0; l < n; ++l)
            rhs += cFrame[l] * w.secondDerivInner(k, DTag::DCenter, l, DTag::DLambda, 0);
        out.residLambda[k] = out.dLambda[k] - rhs;

        Vec gFrame = Vec::Zero(n);
        for (int i = 0; i < n; ++i) {
            const int idxC = sp.indexDCenter(k, i);
            gFrame[i] = w.alpha[k] * (w.innerWithU(idxC) - w.nlAgainstPsi(idxC));
            double rhsY = sol.multB[k] * w.secondDerivInner(k, DTag::DLambda, 0, DTag::DCenter, i);
            for (int l = 0; l < n; ++l)
                rhsY += cFrame[l] * w.secondDerivInner(k, DTag::DCenter, l, DTag::DCenter, i);
            out.residCenter[k][i] = gFrame[i] - rhsY;
        }
        out.dCenter[k] = sp.frame() * gFrame;

        if (model) {
            const double sep = (prob.K_.profile(1).z() - prob.K_.profile(0).z()).norm();
            out.modelDLambda[k] = model->gradLambdaModel(
                dim, k, sp.bubble(0).lambda, sp.bubble(1).lambda, prob.eps_,
                prob.K_.profile(k).sumA(), prob.K_.profile(k).beta(), sep);
        }
    }
    return out;
}

}  // namespace bubbleforge
