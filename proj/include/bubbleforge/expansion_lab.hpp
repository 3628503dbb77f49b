#pragma once

#include <string>

#include "bubbleforge/correction.hpp"
#include "bubbleforge/scaling_fit.hpp"

namespace bubbleforge {

struct VerifierCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
};

struct SweepRow {
    double abscissa = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    double fitResidual = 0.0;
};

// Verdict with the full sample table, so failed fits are diagnosable from the
// report alone.
struct LemmaVerdict {
    std::string lemma;
    bool pass = true;
    std::vector<VerifierCheck> checks;
    std::vector<ScalingFit> fits;
    std::vector<SweepRow> table;
    std::string notes;

    void addCheck(const std::string& name, double measured, double target, double tol) {
        const bool ok = std::abs(measured - target) <= tol;
        checks.push_back({name, ok, measured, target, tol});
        pass = pass && ok;
    }
    void addBoolCheck(const std::string& name, bool ok, double measured = 0.0) {
        checks.push_back({name, ok, measured, 0.0, 0.0});
        pass = pass && ok;
    }
    std::string csv() const;
};

LemmaVerdict verify_lemma_b1(const Dimension& dim, const KProfile& profile,
                             const std::vector<double>& lambdas, const QuadratureSpec& spec);

LemmaVerdict verify_lemma_b2(const Dimension& dim, double separation,
                             const std::vector<double>& lambdas, const QuadratureSpec& spec);

struct B3Config {
    double lambda0 = 20.0;
    std::vector<double> tGrid{0.005, 0.01, 0.02};  // offsets are tGrid[i] / lambda0
    std::vector<double> lambdas{10, 20, 40, 80};
    double tFixed = 0.01;  // lambda * offset held fixed along the lambda sweep
    int axis = 0;
};

LemmaVerdict verify_lemma_b3(const Dimension& dim, const KProfile& profile, const B3Config& cfg,
                             const QuadratureSpec& spec);

LemmaVerdict verify_lemma_b4(const Dimension& dim, double separation,
                             const std::vector<double>& lambdas, const QuadratureSpec& spec);

struct LabConfig {
    std::vector<double> lambdas{10, 20, 40};
    double eps = 1e-3;
    int numTestFns = 20;
    unsigned long long drawSeed = 4242;
};

// A.1 / A.2 / A.6 / A.7 ratio sweeps over >= 20 projected test functions
LemmaVerdict verify_linear_bounds(const Dimension& dim, const LabConfig& cfg, const KProfile& p1,
                                  const KProfile& p2, const QuadratureSpec& spec);

// A.3: the alpha-direction energy balance under controlled eps and lambda sweeps
LemmaVerdict verify_energy_balance(const Dimension& dim, const LabConfig& cfg, const KProfile& p1,
                                   const KProfile& p2, const QuadratureSpec& spec);

struct CoercivityReport {
    double deltaHat = 0.0;
    std::array<double, 2> alphaDiag{0, 0};
    double alphaOffDiag = 0.0;
    double gramCondition = 0.0;
};

// smallest eigenvalue of the projected v-block of Q_eps, plus the alpha-block
// diagnostics of the A.5 structure
CoercivityReport coercivity_spectrum(const GalerkinSpace& space, double eps, const CompositeK& K,
                                     const QuadratureSpec& spec);

}  // namespace bubbleforge
