#pragma once

#include "bubbleforge/galerkin.hpp"

namespace bubbleforge {

// Solved correction (alphaBar, v) with the Lagrange multipliers of the
// constrained stationarity system.
struct CorrectionSolution {
    std::array<double, 2> alphaHat{1.0, 1.0};
    std::array<double, 2> alphaBar{0.0, 0.0};
    Eigen::VectorXd vCoeffs;  // on the projected orthonormal basis
    double vNorm = 0.0;
    int iterations = 0;
    std::array<double, 2> multA{0, 0}, multB{0, 0};
    std::array<Vec, 2> multC;  // original coordinate axes
    double residualNorm = 0.0;
    double fNorm = 0.0;
    double qInvNorm = 0.0;
    std::vector<double> stepNorms;

    std::array<double, 2> alpha() const {
        return {alphaHat[0] + alphaBar[0], alphaHat[1] + alphaBar[1]};
    }
};

class CorrectionProblem;
struct ReducedGradients;
ReducedGradients reduced_gradients(const CorrectionProblem& prob, const CorrectionSolution& sol,
                                   const ExpansionModel* model = nullptr);

// Assembled expansion (2.2): linear form f, quadratic form Q, and the exact
// nonlinear gradient of Jhat on (alphaBar, v). Pure bubble monomials are
// integrated on the deterministic cylindrical grid; K-weighted and v-coupled
// remainders ride one importance-sampled antithetic MC batch fixed at
// construction, so repeated gradient calls see a single consistent estimator.
class CorrectionProblem {
public:
    CorrectionProblem(const GalerkinSpace& space, double eps, const CompositeK& K,
                      const QuadratureSpec& spec);

    const GalerkinSpace& space() const { return space_; }
    double eps() const { return eps_; }
    const std::array<double, 2>& alphaHat() const { return alphaHat_; }
    int omegaDim() const { return 2 + space_.projectedDim(); }

    const Eigen::VectorXd& linearForm() const { return f_; }    // (2.3)
    const Eigen::MatrixXd& quadraticForm() const { return Q_; }  // (2.4)

    // gradient of Jhat_eps at omega = (alphaBar, vCoeffs)
    Eigen::VectorXd gradient(const Eigen::VectorXd& omega) const;
    // <dJ/dv, phi_a> over the full dictionary at omega (normalized entries)
    Eigen::VectorXd dictionaryDefect(const Eigen::VectorXd& omega) const;

    double energy(const std::array<double, 2>& alpha, const Eigen::VectorXd& vCoeffs) const;

    // exposed for the expansion lab
    const Eigen::MatrixXd& weightedPairMatrix() const { return W_; }
    std::array<std::array<double, 2>, 2> alphaBlock() const;
    double rawGram(int a, int b) const;
    const Eigen::ArrayXd& bubbleGrid(int j) const { return j == 0 ? Ug0_ : Ug1_; }
    // int K Bhat^{2*-1} v over the MC batch, v given by dictionary coefficients
    double mcKWeightedLinear(const Eigen::VectorXd& dictCoef) const;
    // int (1+eps K) Bhat^{2*-2} psi_idx v, raw entry psi
    double weightedAgainstEntry(int idx, const Eigen::VectorXd& dictCoef) const;

    // sum_j alpha_j <U_j, U_k> - int (1+eps K)(sum alpha_j U_j)^{2*-1} U_k  (the A.3 balance)
    double energyBalance(int k) const { return f_[k]; }

private:
    friend struct ReducedGradientWork;
    friend ReducedGradients reduced_gradients(const CorrectionProblem&, const CorrectionSolution&,
                                              const ExpansionModel*);
    Eigen::VectorXd integrateAgainstDictionary(const std::array<double, 2>& alpha,
                                               const Eigen::VectorXd& dictCoefOfV) const;

    const GalerkinSpace& space_;
    double eps_;
    const CompositeK& K_;
    QuadratureSpec spec_;
    std::array<double, 2> alphaHat_;

    Eigen::ArrayXd Ug0_, Ug1_;     // raw bubble values on the grid
    Eigen::VectorXd f_;
    Eigen::MatrixXd Wpure_, Wmc_;  // int Bhat^{2*-2} phi phi and its eps K correction
    Eigen::MatrixXd W_;            // sum of the two
    Eigen::MatrixXd Q_;

    // MC batch (antithetic pairs)
    Eigen::MatrixXd X_, Xr_;       // n x pairs
    Eigen::ArrayXd invQ_, Kx_, Kxr_;
    Eigen::MatrixXd Phi_, Phir_;   // nDict x pairs, normalized entry values
    Eigen::ArrayXd U0x_, U1x_, U0xr_, U1xr_;  // raw bubble values at samples
};

CorrectionSolution solve_correction(const GalerkinSpace& space, double eps, const CompositeK& K,
                                    const QuadratureSpec& spec);
CorrectionSolution solve_correction(const CorrectionProblem& prob);

// multipliers alone, given an already-solved correction
void lagrange_multipliers(const CorrectionProblem& prob, CorrectionSolution& sol);

double energy_value(const GalerkinSpace& space, const std::array<double, 2>& alpha,
                    const Eigen::VectorXd& vCoeffs, double eps, const CompositeK& K,
                    const QuadratureSpec& spec);

// Reduced gradients dJ/dlambda_k and dJ/dy_i^k at the solved point, assembled
// term by term so each contribution is integrated at its own scale, plus the
// two-term model prediction for comparison.
struct ReducedGradients {
    std::array<double, 2> dLambda{0, 0};
    std::array<Vec, 2> dCenter;              // original axes
    std::array<double, 2> modelDLambda{0, 0};  // two-term model
    std::array<double, 2> residLambda{0, 0};   // dJ/dlambda minus the (1.8) right-hand side
    std::array<Vec, 2> residCenter;            // dJ/dy minus the (1.7) right-hand side (frame axes)
};

}  // namespace bubbleforge
