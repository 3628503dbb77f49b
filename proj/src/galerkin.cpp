#include "bubbleforge/galerkin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace bubbleforge {

GalerkinSpace::GalerkinSpace(const Dimension& dim, std::array<Vec, 2> centers,
                             std::array<double, 2> lambdas, const DictSpec& dictSpec,
                             const QuadratureSpec& spec)
    : dim_(dim),
      bubbles_{Bubble(centers[0], lambdas[0]),
               Bubble(dictSpec.singleBubble ? centers[0] : centers[1],
                      dictSpec.singleBubble ? lambdas[0] : lambdas[1])},
      single_(dictSpec.singleBubble) {
    const int n = dim_.n;
    frame_ = Eigen::MatrixXd::Identity(n, n);
    if (!single_) {
        const Vec diff = bubbles_[1].y - bubbles_[0].y;
        sep_ = diff.norm();
        if (sep_ <= 0.0) throw std::invalid_argument("build_space: distinct centers required");
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(diff);
        frame_ = qr.householderQ();
        if (frame_.col(0).dot(diff) < 0.0) frame_ = -frame_;
    }
    buildDictionary(dictSpec);
    assemble(dictSpec, spec);
}

void GalerkinSpace::buildDictionary(const DictSpec& ds) {
    const int n = dim_.n;
    dict_.clear();
    constraintIdx_.clear();
    for (int j = 0; j < nBubbles(); ++j) {
        idxDCenter_[j].assign(n, -1);
        const double lam = bubbles_[j].lambda;
        const double pos = j == 0 ? 0.0 : sep_;
        for (double f : ds.scaleFactors) {
            DictEntry e{j, pos, lam * f, DTag::Value, 0};
            if (f == 1.0) idxValue_[j] = static_cast<int>(dict_.size());
            dict_.push_back(e);
        }
        if (ds.derivTags) {
            idxDLambda_[j] = static_cast<int>(dict_.size());
            dict_.push_back({j, pos, lam, DTag::DLambda, 0});
            for (int a = 0; a < n; ++a) {
                idxDCenter_[j][a] = static_cast<int>(dict_.size());
                dict_.push_back({j, pos, lam, DTag::DCenter, a});
            }
        }
        const double c = ds.offsetC / lam;
        dict_.push_back({j, pos - c, lam, DTag::Value, 0});
        dict_.push_back({j, pos + c, lam, DTag::Value, 0});
    }
    if (ds.derivTags) {
        for (int j = 0; j < nBubbles(); ++j) {
            constraintIdx_.push_back(idxValue_[j]);
            constraintIdx_.push_back(idxDLambda_[j]);
            for (int a = 0; a < dim_.n; ++a) constraintIdx_.push_back(idxDCenter_[j][a]);
        }
    }
}

int GalerkinSpace::dirClass(int idx) const {
    const DictEntry& e = dict_[idx];
    return (e.tag == DTag::DCenter && e.frameAxis >= 1) ? e.frameAxis : -1;
}

double GalerkinSpace::bubbleValueOnGrid(int j, double u, double s) const {
    const double pos = j == 0 ? 0.0 : sep_;
    const double r2 = (u - pos) * (u - pos) + s * s;
    const double lam = bubbles_[j].lambda;
    return dim_.cN * std::pow(lam, dim_.m()) * std::pow(1.0 + lam * lam * r2, -dim_.m());
}

namespace {

struct EntryEval {
    double value;  // scalar part on the grid (directional s factor folded in)
    double lhs;    // Delta^2-reduced counterpart
};

EntryEval eval_on_grid(const Dimension& dim, const DictEntry& e, double u, double s) {
    const double du = u - e.axialPos;
    const double r2 = du * du + s * s;
    const double mu = e.scale;
    const double m = dim.m(), p = dim.p();
    const double w = 1.0 + mu * mu * r2;
    const double U = dim.cN * std::pow(mu, m) * std::pow(w, -m);
    double val = 0.0;
    switch (e.tag) {
        case DTag::Value: val = U; break;
        case DTag::DLambda: val = U * (m / mu) * (2.0 / w - 1.0); break;
        case DTag::DCenter: {
            const double D = (dim.n - 4) * mu * mu * U / w;
            val = D * (e.frameAxis == 0 ? du : s);
            break;
        }
    }
    EntryEval out;
    out.value = e.normalization * val;
    const double Upm1 = std::pow(U, p - 1.0);
    out.lhs = e.normalization * (e.tag == DTag::Value ? Upm1 * U : p * Upm1 * val);
    return out;
}

void mask_by_direction(const GalerkinSpace& sp, Eigen::MatrixXd& M) {
    const int nd = static_cast<int>(sp.dictionary().size());
    const double tfac = 1.0 / (sp.dim().n - 1.0);
    for (int a = 0; a < nd; ++a)
        for (int b = 0; b < nd; ++b) {
            const int ca = sp.dirClass(a), cb = sp.dirClass(b);
            if (ca != cb)
                M(a, b) = 0.0;
            else if (ca >= 1)
                M(a, b) *= tfac;
        }
}

}  // namespace

void GalerkinSpace::assemble(const DictSpec& ds, const QuadratureSpec& spec) {
    std::vector<quad::Interest> pts;
    for (int j = 0; j < nBubbles(); ++j)
        pts.push_back({j == 0 ? 0.0 : sep_, 1.0 / bubbles_[j].lambda});
    const int uN = std::max(24, spec.radialNodes / 2);
    const int sN = std::max(24, spec.transverseNodes / 2);
    grid_ = quad::build_axial_grid(dim_.n, pts, uN, sN);

    const int nd = static_cast<int>(dict_.size());
    const auto ng = static_cast<Eigen::Index>(grid_.w.size());
    vals_.resize(nd, ng);
    lhs_.resize(nd, ng);
    for (int a = 0; a < nd; ++a)
        for (Eigen::Index i = 0; i < ng; ++i) {
            const EntryEval ee = eval_on_grid(dim_, dict_[a], grid_.u[i], grid_.s[i]);
            vals_(a, i) = ee.value;
            lhs_(a, i) = ee.lhs;
        }
    const Eigen::ArrayXd w = Eigen::Map<const Eigen::ArrayXd>(grid_.w.data(), ng);

    auto assembleGram = [&]() {
        Eigen::MatrixXd g = lhs_ * w.matrix().asDiagonal() * vals_.transpose();
        mask_by_direction(*this, g);
        return Eigen::MatrixXd(0.5 * (g + g.transpose()));
    };
    Eigen::MatrixXd raw = assembleGram();
    for (int a = 0; a < nd; ++a) {
        const double d = raw(a, a);
        if (!(d > 0.0)) throw std::runtime_error("build_space: nonpositive Gram diagonal");
        dict_[a].normalization = 1.0 / std::sqrt(d);
    }
    for (int a = 0; a < nd; ++a) {
        vals_.row(a) *= dict_[a].normalization;
        lhs_.row(a) *= dict_[a].normalization;
    }
    gram_.resize(nd, nd);
    for (int a = 0; a < nd; ++a)
        for (int b = 0; b < nd; ++b)
            gram_(a, b) = raw(a, b) * dict_[a].normalization * dict_[b].normalization;

    // thinning: eigenvalue cutoff, then constraint null space
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double evMax = ev.maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] > ds.gramCutoff * evMax) keep.push_back(i);
    if (keep.size() <= constraintIdx_.size())
        throw std::runtime_error("build_space: Gram thinning left no room beyond the constraints");
    Eigen::MatrixXd T(nd, keep.size());
    double evMin = evMax;
    for (size_t k = 0; k < keep.size(); ++k) {
        T.col(k) = es.eigenvectors().col(keep[k]) / std::sqrt(ev[keep[k]]);
        evMin = std::min(evMin, ev[keep[k]]);
    }
    gramCondition_ = evMax / evMin;

    Eigen::MatrixXd C(constraintIdx_.size(), nd);
    for (size_t i = 0; i < constraintIdx_.size(); ++i) C.row(i) = gram_.row(constraintIdx_[i]);
    const Eigen::MatrixXd Chat = C * T;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Chat, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-10 * sv[0]) ++rank;
    const Eigen::Index K = Chat.cols() - rank;
    if (K <= 0) throw std::runtime_error("build_space: constraints exhaust the dictionary span");
    basis_ = T * svd.matrixV().rightCols(K);
}

double GalerkinSpace::entryScalarUS(int idx, double u, double s) const {
    return eval_on_grid(dim_, dict_[idx], u, s).value;
}

double GalerkinSpace::constraintDefect() const {
    double worst = 0.0;
    for (int idx : constraintIdx_) {
        const Eigen::VectorXd row = gram_.row(idx) * basis_;
        worst = std::max(worst, row.cwiseAbs().maxCoeff());
    }
    return worst;
}

double GalerkinSpace::evalEntry(int idx, const Vec& x) const {
    const DictEntry& e = dict_[idx];
    Vec xf = frame_.transpose() * (x - bubbles_[0].y);
    xf[0] -= e.axialPos;
    const double r2 = xf.squaredNorm();
    const double mu = e.scale;
    const double m = dim_.m();
    const double w = 1.0 + mu * mu * r2;
    const double U = dim_.cN * std::pow(mu, m) * std::pow(w, -m);
    double val = 0.0;
    switch (e.tag) {
        case DTag::Value: val = U; break;
        case DTag::DLambda: val = U * (m / mu) * (2.0 / w - 1.0); break;
        case DTag::DCenter: val = (dim_.n - 4) * mu * mu * xf[e.frameAxis] * U / w; break;
    }
    return e.normalization * val;
}

double GalerkinSpace::evalV(const Eigen::VectorXd& vCoeffs, const Vec& x) const {
    const Eigen::VectorXd dcoef = basis_ * vCoeffs;
    double out = 0.0;
    for (int a = 0; a < dcoef.size(); ++a)
        if (dcoef[a] != 0.0) out += dcoef[a] * evalEntry(a, x);
    return out;
}

Eigen::MatrixXd GalerkinSpace::pairAll(const Eigen::ArrayXd& weightField) const {
    const auto ng = static_cast<Eigen::Index>(grid_.w.size());
    const Eigen::ArrayXd w =
        Eigen::Map<const Eigen::ArrayXd>(grid_.w.data(), ng) * weightField;
    Eigen::MatrixXd M = vals_ * w.matrix().asDiagonal() * vals_.transpose();
    mask_by_direction(*this, M);
    return 0.5 * (M + M.transpose());
}

Eigen::VectorXd GalerkinSpace::pairAgainstScalar(const Eigen::ArrayXd& scalarTimesWeight) const {
    const auto ng = static_cast<Eigen::Index>(grid_.w.size());
    const Eigen::ArrayXd w =
        Eigen::Map<const Eigen::ArrayXd>(grid_.w.data(), ng) * scalarTimesWeight;
    Eigen::VectorXd t = vals_ * w.matrix();
    for (int a = 0; a < t.size(); ++a)
        if (dirClass(a) >= 1) t[a] = 0.0;
    return t;
}

Eigen::VectorXd GalerkinSpace::pairAgainstClass(const Eigen::ArrayXd& field, int cls) const {
    const auto ng = static_cast<Eigen::Index>(grid_.w.size());
    const Eigen::ArrayXd w = Eigen::Map<const Eigen::ArrayXd>(grid_.w.data(), ng) * field;
    Eigen::VectorXd t = vals_ * w.matrix();
    const double tfac = 1.0 / (dim_.n - 1.0);
    for (int a = 0; a < t.size(); ++a) t[a] = dirClass(a) == cls ? t[a] * tfac : 0.0;
    return t;
}

double GalerkinSpace::gridSum(const Eigen::ArrayXd& field) const {
    const auto ng = static_cast<Eigen::Index>(grid_.w.size());
    return (Eigen::Map<const Eigen::ArrayXd>(grid_.w.data(), ng) * field).sum();
}

GalerkinSpace build_space(const Dimension& dim, std::array<Vec, 2> centers,
                          std::array<double, 2> lambdas, const DictSpec& dictSpec,
                          const QuadratureSpec& spec) {
    spec.validate();
    return GalerkinSpace(dim, std::move(centers), std::move(lambdas), dictSpec, spec);
}

}  // namespace bubbleforge
