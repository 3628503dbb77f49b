#pragma once

#include <nlohmann/json_fwd.hpp>

#include "bubbleforge/expansion_lab.hpp"
#include "bubbleforge/reduced.hpp"

namespace bubbleforge {

struct ProfileConfig {
    std::vector<double> z, a;
    double beta = 1.5, sigma = 0.5, K0 = 1.0, r0 = 0.2;
    KProfile build() const;
};

struct RunConfig {
    int schemaVersion = 1;
    int n = 6;
    std::array<ProfileConfig, 2> profiles;
    std::vector<double> epsList{8e-3, 4e-3, 2e-3};
    QuadratureSpec quad;
    double offsetC = 0.3;
    double gamma1 = 0.5, gamma2 = 400.0, deltaBox = 0.5;
    std::string gradientSource = "full";  // "full" | "model"
    std::string outDir = "out";
    unsigned long long seed = 20260801ull;

    static RunConfig defaults(int n = 6);
    static RunConfig fromJsonFile(const std::string& path);
    static RunConfig fromJson(const nlohmann::json& j);
    nlohmann::json toJson() const;
    void validate() const;
};

struct PositivityVerdict {
    bool pass = false;
    double minValue = 0.0;
    std::vector<double> witness;  // location of the minimum
    double negativePartLp = 0.0;  // L^{2*} norm of u^-
};

// pointwise field: ansatz closed forms plus the dictionary expansion of v
struct AssembledSolution {
    const GalerkinSpace* space = nullptr;
    std::array<double, 2> alpha{1, 1};
    Eigen::VectorXd vCoeffs;
    double operator()(const Vec& x) const;
};

PositivityVerdict positivity_check(const std::function<double(const Vec&)>& u, const Dimension& dim,
                                   const Bubble& b1, const Bubble& b2, const QuadratureSpec& spec);

struct EpsPointReport {
    double eps = 0.0;
    bool accepted = false;
    std::string failure;
    std::array<double, 2> alpha{0, 0};
    std::array<double, 2> lambda{0, 0};
    std::array<double, 2> yOffset{0, 0};  // |y^j - z^j|
    double vNorm = 0.0;
    double fNorm = 0.0;
    double qInvNorm = 0.0;
    int iterations = 0;
    double residualNorm = 0.0;
    std::array<double, 2> tStar{0, 0};
    PositivityVerdict positivity;
};

struct TrendReport {
    bool vDecreasing = false;
    bool yOffsetTrend = false;
    bool alphaTrend = false;
    double lambdaSlope = 0.0;
    bool lambdaSlopeOk = false;
    bool pass = false;
};

struct RunReport {
    RunConfig config;
    std::vector<std::array<std::string, 7>> constantsTable;  // name,n,beta,value,method,crosscheck,reldev
    std::vector<EpsPointReport> points;
    TrendReport trends;
    DegreeResult gDegree;
    int productDegree = 0;
    bool allPass = false;
    double elapsedSeconds = 0.0;  // never serialized

    nlohmann::json toJson() const;
};

RunReport run_pipeline(const RunConfig& cfg);

// (a) canonical report JSON, (b) per-sweep CSV, (c) constants CSV; byte-stable
// for identical (config, seed)
void emit_report(const RunReport& report, const std::string& outDir);

std::vector<std::array<std::string, 7>> constants_table(const Dimension& dim,
                                                        const std::array<double, 2>& betas,
                                                        const QuadratureSpec& spec);
std::string constants_csv(const std::vector<std::array<std::string, 7>>& rows);

}  // namespace bubbleforge
