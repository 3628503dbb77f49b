#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bubbleforge/pipeline.hpp"

using namespace bubbleforge;
using nlohmann::json;

namespace {

RunConfig loadConfig(const std::string& path, unsigned long long seedOverride,
                     const std::vector<double>& epsOverride, const std::string& outOverride) {
    RunConfig cfg = path.empty() ? RunConfig::defaults() : RunConfig::fromJsonFile(path);
    if (seedOverride != 0) {
        cfg.seed = seedOverride;
        cfg.quad.seed = seedOverride;
    }
    if (!epsOverride.empty()) cfg.epsList = epsOverride;
    if (!outOverride.empty()) cfg.outDir = outOverride;
    cfg.validate();
    return cfg;
}

void writeText(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    out << content;
}

int printVerdict(const LemmaVerdict& v, const RunConfig& cfg, const std::string& fileStem) {
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.lemma << "\n";
    for (const auto& c : v.checks)
        std::cout << "  " << (c.pass ? "[pass] " : "[fail] ") << c.name << ": measured "
                  << c.measured << " target " << c.target << " tol " << c.tolerance << "\n";
    if (!v.notes.empty()) std::cout << "  note: " << v.notes << "\n";
    writeText(cfg.outDir, fileStem + ".csv", v.csv());
    return v.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-peak construction and verification toolkit for the critical biharmonic equation"};
    app.require_subcommand(1);

    std::string configPath, outDir;
    unsigned long long seed = 0;
    std::vector<double> epsList;
    app.add_option("--config", configPath, "JSON run configuration");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", outDir, "output directory");
    app.add_option("--eps-list", epsList, "override the epsilon sweep");

    auto* cmdConstants = app.add_subcommand("constants", "structure and expansion constants");
    std::string lemma;
    auto* cmdVerify = app.add_subcommand("verify", "verify one appendix estimate");
    cmdVerify->add_option("lemma", lemma, "a1|a2|a3|a4|a5|a6|a7|b1|b2|b3|b4")->required();
    auto* cmdReduce = app.add_subcommand("reduce", "build the space and solve the correction");
    auto* cmdSolveReduced = app.add_subcommand("solve-reduced", "roots of the reduced system");
    auto* cmdDegree = app.add_subcommand("degree", "Brouwer degree certificates");
    auto* cmdPipeline = app.add_subcommand("pipeline", "end-to-end construction sweep");
    auto* cmdPositivity = app.add_subcommand("positivity", "positivity of the assembled solution");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = loadConfig(configPath, seed, epsList, outDir);
        Dimension dim(cfg.n);
        const KProfile p1 = cfg.profiles[0].build();
        const KProfile p2 = cfg.profiles[1].build();
        const double sep = (p2.z() - p1.z()).norm();

        if (cmdConstants->parsed()) {
            const auto rows = constants_table(dim, {p1.beta(), p2.beta()}, cfg.quad);
            const std::string csv = constants_csv(rows);
            std::cout << csv;
            writeText(cfg.outDir, "constants.csv", csv);
            return 0;
        }

        if (cmdVerify->parsed()) {
            LabConfig lab;
            lab.eps = cfg.epsList.empty() ? 1e-3 : cfg.epsList.back();
            if (lemma == "b1")
                return printVerdict(verify_lemma_b1(dim, p1, {10, 20, 40, 80}, cfg.quad), cfg,
                                    "verify_b1");
            if (lemma == "b2")
                return printVerdict(verify_lemma_b2(dim, sep, {10, 20, 40, 80}, cfg.quad), cfg,
                                    "verify_b2");
            if (lemma == "b3")
                return printVerdict(verify_lemma_b3(dim, p1, B3Config{}, cfg.quad), cfg,
                                    "verify_b3");
            if (lemma == "b4")
                return printVerdict(verify_lemma_b4(dim, sep, {10, 20, 40, 80}, cfg.quad), cfg,
                                    "verify_b4");
            if (lemma == "a1" || lemma == "a2" || lemma == "a6" || lemma == "a7")
                return printVerdict(verify_linear_bounds(dim, lab, p1, p2, cfg.quad), cfg,
                                    "verify_linear_bounds");
            if (lemma == "a3")
                return printVerdict(verify_energy_balance(dim, lab, p1, p2, cfg.quad), cfg,
                                    "verify_a3");
            if (lemma == "a4" || lemma == "a5") {
                const CompositeK K(p1, p2);
                GalerkinSpace space(dim, {p1.z(), p2.z()}, {20.0, 20.0}, DictSpec{}, cfg.quad);
                LemmaVerdict v;
                v.lemma = "A.4/A.5";
                for (double eps : {0.0, 1e-2}) {
                    const CoercivityReport rep = coercivity_spectrum(space, eps, K, cfg.quad);
                    v.addBoolCheck("delta_hat > 0 at eps=" + std::to_string(eps),
                                   rep.deltaHat > 0.0, rep.deltaHat);
                }
                GalerkinSpace far(dim, {p1.z(), p2.z()}, {2000.0, 2000.0}, DictSpec{}, cfg.quad);
                const CoercivityReport rep = coercivity_spectrum(far, 0.0, K, cfg.quad);
                const double A = closed_form_A(dim);
                v.addCheck("alpha diagonal vs -(2*-2) A", rep.alphaDiag[0],
                           -(dim.twoStar - 2.0) * A, 1e-6 * A);
                return printVerdict(v, cfg, "verify_coercivity");
            }
            std::cerr << "unknown lemma " << lemma << "\n";
            return 2;
        }

        if (cmdSolveReduced->parsed()) {
            const ExpansionModel model = build_expansion_model(dim, p1, p2, sep, cfg.quad);
            const ReducedRoot root = solve_reduced(model.mk, {p1.beta(), p2.beta()}, dim,
                                                   {cfg.gamma1, cfg.gamma2});
            json j;
            j["t"] = root.t;
            j["gNorm"] = root.gNorm;
            j["jacDet"] = root.jacDet;
            j["m"] = model.mk;
            j["uniqueness"] = {{"rootCells", root.uniqueness.rootCells},
                               {"candidateCells", root.uniqueness.candidateCells}};
            std::cout << j.dump(2) << "\n";
            writeText(cfg.outDir, "reduced_root.json", j.dump(2) + "\n");
            return 0;
        }

        if (cmdDegree->parsed()) {
            const ExpansionModel model = build_expansion_model(dim, p1, p2, sep, cfg.quad);
            const auto idMap = [](double x, double y) { return std::array<double, 2>{x, y}; };
            const auto reflMap = [](double x, double y) { return std::array<double, 2>{x, -y}; };
            const auto gMap = [&](double t1, double t2) {
                return g_map({t1, t2}, model.mk, {p1.beta(), p2.beta()}, dim);
            };
            const DegreeResult d1 = brouwer_degree(idMap, {-1, 1, -1, 1}, 32);
            const DegreeResult d2 = brouwer_degree(reflMap, {-1, 1, -1, 1}, 32);
            const DegreeResult d3 =
                brouwer_degree(gMap, {cfg.gamma1, cfg.gamma2, cfg.gamma1, cfg.gamma2}, 64);
            json j;
            j["identity"] = d1.degree;
            j["reflection"] = d2.degree;
            j["g"] = {{"degree", d3.degree},
                      {"winding", d3.totalWinding},
                      {"minBoundaryNorm", d3.minBoundaryNorm}};
            j["product"] = 1 * d3.degree;
            std::cout << j.dump(2) << "\n";
            writeText(cfg.outDir, "degree.json", j.dump(2) + "\n");
            const bool ok = d1.degree == 1 && d2.degree == -1 && d3.degree == -1;
            return ok ? 0 : 1;
        }

        if (cmdReduce->parsed() || cmdPositivity->parsed()) {
            const double eps = cfg.epsList.front();
            const ExpansionModel model = build_expansion_model(dim, p1, p2, sep, cfg.quad);
            const LEpsResult L = l_eps(eps, p1.beta(), p2.beta(), dim);
            const ReducedRoot root = solve_reduced(model.mk, {p1.beta(), p2.beta()}, dim,
                                                   {cfg.gamma1, cfg.gamma2});
            const std::array<double, 2> lam{root.t[0] * std::pow(L.value, 1.0 / p1.beta()),
                                            root.t[1] * std::pow(L.value, 1.0 / p2.beta())};
            const CompositeK K(p1, p2);
            GalerkinSpace space(dim, {p1.z(), p2.z()}, {lam[0], lam[1]}, DictSpec{}, cfg.quad);
            const CorrectionSolution sol = solve_correction(space, eps, K, cfg.quad);
            if (cmdReduce->parsed()) {
                json j;
                j["eps"] = eps;
                j["lambda"] = lam;
                j["alphaHat"] = sol.alphaHat;
                j["alphaBar"] = sol.alphaBar;
                j["alpha"] = sol.alpha();
                j["vNorm"] = sol.vNorm;
                j["vCoeffs"] = std::vector<double>(sol.vCoeffs.data(),
                                                   sol.vCoeffs.data() + sol.vCoeffs.size());
                j["iterations"] = sol.iterations;
                j["multA"] = sol.multA;
                j["multB"] = sol.multB;
                j["residualNorm"] = sol.residualNorm;
                j["fNorm"] = sol.fNorm;
                j["dictionary"] = {{"size", space.dictionary().size()},
                                   {"projectedDim", space.projectedDim()},
                                   {"gramCondition", space.gramCondition()}};
                std::cout << j.dump(2) << "\n";
                writeText(cfg.outDir, "correction.json", j.dump(2) + "\n");
                return 0;
            }
            AssembledSolution u{&space, sol.alpha(), sol.vCoeffs};
            const PositivityVerdict v = positivity_check([&](const Vec& x) { return u(x); }, dim,
                                                         space.bubble(0), space.bubble(1), cfg.quad);
            std::cout << (v.pass ? "[PASS]" : "[FAIL]") << " positivity: min " << v.minValue
                      << ", |u^-|_{L2*} " << v.negativePartLp << "\n";
            return v.pass ? 0 : 1;
        }

        if (cmdPipeline->parsed()) {
            const RunReport rep = run_pipeline(cfg);
            emit_report(rep, cfg.outDir);
            std::cerr << "pipeline elapsed " << rep.elapsedSeconds << " s\n";
            std::cout << (rep.allPass ? "[PASS]" : "[FAIL]") << " pipeline; report in "
                      << cfg.outDir << "\n";
            return rep.allPass ? 0 : 1;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
