#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bubbleforge/constants.hpp"
#include "bubbleforge/kprofile.hpp"

namespace bubbleforge {

// One dictionary function: a bubble-family member at (center, scale) with a
// derivative tag. Centers live on the separation axis; frameAxis indexes the
// rotated frame (0 = axial direction, >=1 transverse) for DCenter tags.
struct DictEntry {
    int bubble = 0;
    double axialPos = 0.0;
    double scale = 1.0;
    DTag tag = DTag::Value;
    int frameAxis = 0;
    double normalization = 1.0;  // applied multiplicatively so diag(gram) = 1
};

struct DictSpec {
    std::vector<double> scaleFactors{0.5, M_SQRT1_2, 1.0, M_SQRT2, 2.0};
    double offsetC = 0.3;     // axial offset centers at +- offsetC / lambda
    bool derivTags = true;    // include dLambda and dCenter tags
    bool singleBubble = false;
    double gramCutoff = 1e-12;  // relative eigenvalue cutoff (thinning)
};

// Finite-dimensional slice of E^2_{y,lambda}: bubble dictionary, D^{2,2} Gram,
// the 2(n+2) constraint functionals, and an orthonormal basis of their null space.
class GalerkinSpace {
public:
    GalerkinSpace(const Dimension& dim, std::array<Vec, 2> centers, std::array<double, 2> lambdas,
                  const DictSpec& dictSpec, const QuadratureSpec& spec);

    const Dimension& dim() const { return dim_; }
    const Bubble& bubble(int j) const { return bubbles_[j]; }
    bool singleBubble() const { return single_; }
    int nBubbles() const { return single_ ? 1 : 2; }
    const Eigen::MatrixXd& frame() const { return frame_; }
    double separation() const { return sep_; }

    const std::vector<DictEntry>& dictionary() const { return dict_; }
    const std::vector<int>& constraintIndices() const { return constraintIdx_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::MatrixXd& projectedBasis() const { return basis_; }
    int projectedDim() const { return static_cast<int>(basis_.cols()); }
    double gramCondition() const { return gramCondition_; }

    // index of the plain bubble / dLambda / dCenter entries of bubble j
    int indexValue(int j) const { return idxValue_[j]; }
    int indexDLambda(int j) const { return idxDLambda_[j]; }
    int indexDCenter(int j, int frameAxis) const { return idxDCenter_[j][frameAxis]; }

    // max over constraints c and basis columns k of |<c, P_k>| / ||c||
    double constraintDefect() const;

    // entry evaluation at a physical point
    double evalEntry(int idx, const Vec& x) const;
    // v(x) given coefficients on the projected basis
    double evalV(const Eigen::VectorXd& vCoeffs, const Vec& x) const;
    Vec toFrame(const Vec& x) const { return frame_.transpose() * (x - bubbles_[0].y); }

    // quadrature grid shared by all pure-bubble assembly integrals
    const quad::AxialGrid& grid() const { return grid_; }
    // scalar grid values per entry (directional s factor folded in), and the
    // Delta^2-reduced counterparts; dirClass(): -1 none, >=1 transverse axis
    const Eigen::MatrixXd& gridValues() const { return vals_; }
    const Eigen::MatrixXd& gridLhs() const { return lhs_; }
    int dirClass(int idx) const;
    // weighted pairing of two grid-value rows under an extra scalar weight field
    Eigen::MatrixXd pairAll(const Eigen::ArrayXd& weightField) const;
    Eigen::VectorXd pairAgainstScalar(const Eigen::ArrayXd& scalarTimesWeight) const;
    // pairing against a test field carrying one transverse direction factor of
    // the given class; the field must already contain its own s factor
    Eigen::VectorXd pairAgainstClass(const Eigen::ArrayXd& field, int cls) const;
    double gridSum(const Eigen::ArrayXd& field) const;

    double bubbleValueOnGrid(int j, double u, double s) const;
    // scalar grid value of one entry at an arbitrary (u, s), same convention as gridValues()
    double entryScalarUS(int idx, double u, double s) const;

private:
    void buildDictionary(const DictSpec& ds);
    void assemble(const DictSpec& ds, const QuadratureSpec& spec);

    Dimension dim_;
    std::array<Bubble, 2> bubbles_;
    bool single_ = false;
    double sep_ = 0.0;
    Eigen::MatrixXd frame_;
    std::vector<DictEntry> dict_;
    std::vector<int> constraintIdx_;
    std::array<int, 2> idxValue_{-1, -1};
    std::array<int, 2> idxDLambda_{-1, -1};
    std::array<std::vector<int>, 2> idxDCenter_;
    Eigen::MatrixXd gram_, basis_;
    double gramCondition_ = 0.0;
    quad::AxialGrid grid_;
    Eigen::MatrixXd vals_, lhs_;
};

GalerkinSpace build_space(const Dimension& dim, std::array<Vec, 2> centers,
                          std::array<double, 2> lambdas, const DictSpec& dictSpec,
                          const QuadratureSpec& spec);

inline double alpha_hat(const Dimension& dim, double eps, const KProfile& prof) {
    return std::pow(1.0 + eps * prof.K0(), -(dim.n - 4.0) / 8.0);
}

}  // namespace bubbleforge
