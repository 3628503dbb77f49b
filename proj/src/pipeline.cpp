#include "bubbleforge/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

namespace bubbleforge {

using nlohmann::json;

KProfile ProfileConfig::build() const {
    Vec zv = Eigen::Map<const Vec>(z.data(), z.size());
    Vec av = Eigen::Map<const Vec>(a.data(), a.size());
    return KProfile(zv, av, beta, sigma, K0, r0);
}

RunConfig RunConfig::defaults(int n) {
    RunConfig cfg;
    cfg.n = n;
    for (int j = 0; j < 2; ++j) {
        cfg.profiles[j].z.assign(n, 0.0);
        cfg.profiles[j].a.assign(n, -1.0);
        cfg.profiles[j].beta = 1.5;
        cfg.profiles[j].sigma = 0.5;
        cfg.profiles[j].K0 = 1.0;
        cfg.profiles[j].r0 = 0.2;
    }
    cfg.profiles[1].z[0] = 1.0;
    return cfg;
}

void RunConfig::validate() const {
    if (schemaVersion != 1) throw std::invalid_argument("config: unsupported schemaVersion");
    Dimension dim(n);
    if (!dim.pipelineAdmissible())
        throw std::invalid_argument("config: the theorem pipeline requires n >= 6");
    for (const auto& p : profiles) {
        if (static_cast<int>(p.z.size()) != n || static_cast<int>(p.a.size()) != n)
            throw std::invalid_argument("config: profile z/a must have length n");
        p.build();  // runs the KProfile invariants
    }
    if (epsList.empty()) throw std::invalid_argument("config: epsList empty");
    quad.validate();
    if (!(gamma1 > 0 && gamma2 > gamma1)) throw std::invalid_argument("config: bad reduced box");
}

RunConfig RunConfig::fromJson(const json& j) {
    RunConfig cfg = defaults(j.value("n", 6));
    cfg.schemaVersion = j.value("schemaVersion", 1);
    if (j.contains("profiles")) {
        const auto& ps = j.at("profiles");
        for (int k = 0; k < 2; ++k) {
            const auto& p = ps.at(k);
            auto& dst = cfg.profiles[k];
            if (p.contains("z")) dst.z = p.at("z").get<std::vector<double>>();
            if (p.contains("a")) dst.a = p.at("a").get<std::vector<double>>();
            dst.beta = p.value("beta", dst.beta);
            dst.sigma = p.value("sigma", dst.sigma);
            dst.K0 = p.value("K0", dst.K0);
            dst.r0 = p.value("r0", dst.r0);
        }
    }
    if (j.contains("epsList")) cfg.epsList = j.at("epsList").get<std::vector<double>>();
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        cfg.quad.radialNodes = q.value("radialNodes", cfg.quad.radialNodes);
        cfg.quad.mapScale = q.value("mapScale", cfg.quad.mapScale);
        cfg.quad.transverseNodes = q.value("transverseNodes", cfg.quad.transverseNodes);
        cfg.quad.mcSamples = q.value("mcSamples", cfg.quad.mcSamples);
        cfg.quad.relTol = q.value("relTol", cfg.quad.relTol);
    }
    cfg.offsetC = j.value("offsetC", cfg.offsetC);
    cfg.gamma1 = j.value("gamma1", cfg.gamma1);
    cfg.gamma2 = j.value("gamma2", cfg.gamma2);
    cfg.deltaBox = j.value("deltaBox", cfg.deltaBox);
    cfg.gradientSource = j.value("gradientSource", cfg.gradientSource);
    cfg.outDir = j.value("outDir", cfg.outDir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.quad.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::fromJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    in >> j;
    return fromJson(j);
}

json RunConfig::toJson() const {
    json j;
    j["schemaVersion"] = schemaVersion;
    j["n"] = n;
    j["profiles"] = json::array();
    for (const auto& p : profiles)
        j["profiles"].push_back({{"z", p.z},
                                 {"a", p.a},
                                 {"beta", p.beta},
                                 {"sigma", p.sigma},
                                 {"K0", p.K0},
                                 {"r0", p.r0}});
    j["epsList"] = epsList;
    j["quadrature"] = {{"radialNodes", quad.radialNodes},
                       {"mapScale", quad.mapScale},
                       {"transverseNodes", quad.transverseNodes},
                       {"mcSamples", quad.mcSamples},
                       {"relTol", quad.relTol}};
    j["offsetC"] = offsetC;
    j["gamma1"] = gamma1;
    j["gamma2"] = gamma2;
    j["deltaBox"] = deltaBox;
    j["gradientSource"] = gradientSource;
    j["outDir"] = outDir;
    j["seed"] = seed;
    return j;
}

double AssembledSolution::operator()(const Vec& x) const {
    double val = 0.0;
    for (int j = 0; j < space->nBubbles(); ++j)
        val += alpha[j] * bubble_value(space->dim(), space->bubble(j), x);
    return val + space->evalV(vCoeffs, x);
}

PositivityVerdict positivity_check(const std::function<double(const Vec&)>& u, const Dimension& dim,
                                   const Bubble& b1, const Bubble& b2,
                                   const QuadratureSpec& spec) {
    PositivityVerdict out;
    out.minValue = std::numeric_limits<double>::infinity();
    Vec argmin = b1.y;
    BubbleMixture mix(dim, b1, b2);
    Rng rng(spec.seed, 91);

    auto consider = [&](const Vec& x) {
        const double v = u(x);
        if (v < out.minValue) {
            out.minValue = v;
            argmin = x;
        }
    };

    // importance-sampled cloud
    const int cloud = 10000;
    for (int i = 0; i < cloud; ++i) consider(mix.sample(rng));
    // dense balls around both centers
    for (const Bubble* b : {&b1, &b2}) {
        Vec dir(dim.n);
        for (int id = 0; id < 60; ++id) {
            rng.direction(dir);
            for (int ir = 0; ir <= 25; ++ir) {
                const double r = 8.0 * ir / (25.0 * b->lambda);
                consider(b->y + r * dir);
            }
        }
    }

    // L^{2*} norm of the negative part by importance MC
    double acc = 0.0;
    const long long M = std::max<long long>(spec.mcSamples, 10000);
    for (long long i = 0; i < M; ++i) {
        const Vec x = mix.sample(rng);
        const double neg = std::max(0.0, -u(x));
        if (neg > 0.0) {
            consider(x);
            acc += std::pow(neg, dim.twoStar) / mix.pdf(x);
        }
    }
    out.negativePartLp = std::pow(acc / M, 1.0 / dim.twoStar);
    out.pass = out.minValue > 0.0 && out.negativePartLp <= 1e-8;
    out.witness.assign(argmin.data(), argmin.data() + argmin.size());
    return out;
}

std::vector<std::array<std::string, 7>> constants_table(const Dimension& dim,
                                                        const std::array<double, 2>& betas,
                                                        const QuadratureSpec& spec) {
    std::vector<std::array<std::string, 7>> rows;
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    const std::string nstr = std::to_string(dim.n);
    const StructureConstants sc = structure_constants(dim, spec);
    const double Aclosed = closed_form_A(dim);
    rows.push_back({"A", nstr, "", fmt(sc.A), "radial quadrature", fmt(Aclosed),
                    fmt(std::abs(sc.A - Aclosed) / Aclosed)});
    rows.push_back({"E", nstr, "", fmt(sc.E), "pair quadrature", fmt(sc.A),
                    fmt(std::abs(sc.E - sc.A) / sc.A)});
    const double F7 = f_constant_at(dim, 7.0, spec);
    rows.push_back({"F", nstr, "", fmt(sc.F), "pair quadrature", fmt(F7),
                    fmt(std::abs(sc.F - F7) / sc.F)});
    const double G7 = g_constant_at(dim, 7.0, spec);
    rows.push_back({"G", nstr, "", fmt(sc.G), "pair quadrature", fmt(G7),
                    fmt(std::abs(sc.G - G7) / sc.G)});
    const auto inter = interaction_constants(dim, spec);
    for (double beta : betas) {
        const std::string bstr = fmt(beta);
        const double c = c_n_beta(dim, beta, spec);
        const auto b1v = verify_lemma_b1(
            Dimension(dim.n),
            KProfile(Vec::Zero(dim.n), Vec::Constant(dim.n, -1.0), beta, 0.5, 0.0, 1.0),
            {10, 20, 40, 80}, spec);
        const double fitted = std::abs(b1v.fits[0].constant) / dim.n;
        rows.push_back({"C_{N,beta}", nstr, bstr, fmt(c), "1-D reduction", fmt(fitted),
                        fmt(std::abs(c - fitted) / c)});
        rows.push_back({"D_{N,beta}", nstr, bstr, fmt(d_n_beta(dim, beta, spec)), "1-D reduction",
                        "", ""});
    }
    rows.push_back({"C0", nstr, "", fmt(inter.c0), "b2 sweep fit", "", fmt(inter.c0MaxRelDev)});
    rows.push_back({"C1", nstr, "", fmt(inter.c1), "b4 sweep fit", "", fmt(inter.c1MaxRelDev)});
    return rows;
}

std::string constants_csv(const std::vector<std::array<std::string, 7>>& rows) {
    std::ostringstream os;
    os << "name,n,beta,value,method,crosscheck,reldev\n";
    for (const auto& r : rows) {
        for (int i = 0; i < 7; ++i) os << r[i] << (i + 1 < 7 ? "," : "");
        os << "\n";
    }
    return os.str();
}

RunReport run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.config = cfg;
    Dimension dim(cfg.n);
    QuadratureSpec spec = cfg.quad;
    spec.seed = cfg.seed;

    const KProfile p1 = cfg.profiles[0].build();
    const KProfile p2 = cfg.profiles[1].build();
    const CompositeK K(p1, p2);
    const double sep = (p2.z() - p1.z()).norm();

    rep.constantsTable = constants_table(dim, {p1.beta(), p2.beta()}, spec);
    const ExpansionModel model = build_expansion_model(dim, p1, p2, sep, spec);

    // reduced-system degree certificates on the configured box
    rep.gDegree = brouwer_degree(
        [&](double t1, double t2) {
            if (t1 <= 0 || t2 <= 0) return std::array<double, 2>{1.0, 1.0};
            return g_map({t1, t2}, model.mk, {p1.beta(), p2.beta()}, dim);
        },
        {cfg.gamma1, cfg.gamma2, cfg.gamma1, cfg.gamma2}, 64);
    rep.productDegree = 1 * rep.gDegree.degree;  // offsets factor is the identity

    const ReducedRoot tRoot =
        solve_reduced(model.mk, {p1.beta(), p2.beta()}, dim, {cfg.gamma1, cfg.gamma2});

    for (double eps : cfg.epsList) {
        EpsPointReport pt;
        pt.eps = eps;
        try {
            std::unique_ptr<ReducedSystemSource> source;
            if (cfg.gradientSource == "model")
                source = std::make_unique<ModelReducedSource>(
                    dim, model, std::array<double, 2>{p1.sumA(), p2.sumA()},
                    std::array<double, 2>{p1.beta(), p2.beta()});
            else
                source = std::make_unique<FullReducedSource>(dim, p1, p2, eps, model, spec);
            const FullReducedResult red =
                solve_full_reduced(*source, dim, {cfg.gamma1, cfg.gamma2}, cfg.deltaBox, tRoot.t);
            pt.tStar = red.point.t;

            const LEpsResult L = l_eps(eps, p1.beta(), p2.beta(), dim);
            const std::array<double, 2> lam{red.point.t[0] * std::pow(L.value, 1.0 / p1.beta()),
                                            red.point.t[1] * std::pow(L.value, 1.0 / p2.beta())};
            std::array<Vec, 2> y{p1.z() + red.point.x[0] / lam[0],
                                 p2.z() + red.point.x[1] / lam[1]};
            pt.lambda = lam;
            pt.yOffset = {(y[0] - p1.z()).norm(), (y[1] - p2.z()).norm()};

            DictSpec ds;
            ds.offsetC = cfg.offsetC;
            GalerkinSpace space(dim, {y[0], y[1]}, {lam[0], lam[1]}, ds, spec);
            CorrectionProblem prob(space, eps, K, spec);
            const CorrectionSolution sol = solve_correction(prob);
            pt.alpha = sol.alpha();
            pt.vNorm = sol.vNorm;
            pt.fNorm = sol.fNorm;
            pt.qInvNorm = sol.qInvNorm;
            pt.iterations = sol.iterations;
            pt.residualNorm = sol.residualNorm;

            AssembledSolution u{&space, sol.alpha(), sol.vCoeffs};
            pt.positivity =
                positivity_check([&](const Vec& x) { return u(x); }, dim, space.bubble(0),
                                 space.bubble(1), spec);
            pt.accepted = true;
        } catch (const std::exception& ex) {
            pt.accepted = false;
            pt.failure = ex.what();
        }
        rep.points.push_back(std::move(pt));
    }

    // Theorem 1.1 trends across the sweep (eps decreasing), 10% slack
    TrendReport& tr = rep.trends;
    tr.vDecreasing = true;
    tr.yOffsetTrend = true;
    tr.alphaTrend = true;
    std::vector<std::array<double, 2>> lamSamples;
    const EpsPointReport* prev = nullptr;
    for (const auto& pt : rep.points) {
        if (!pt.accepted) {
            tr.vDecreasing = tr.yOffsetTrend = tr.alphaTrend = false;
            break;
        }
        lamSamples.push_back({pt.eps, pt.lambda[0]});
        if (prev) {
            tr.vDecreasing = tr.vDecreasing && pt.vNorm < prev->vNorm;
            for (int j = 0; j < 2; ++j) {
                tr.yOffsetTrend = tr.yOffsetTrend && pt.yOffset[j] <= prev->yOffset[j] * 1.10;
                tr.alphaTrend = tr.alphaTrend &&
                                std::abs(pt.alpha[j] - 1.0) <= std::abs(prev->alpha[j] - 1.0) * 1.10;
            }
        }
        prev = &pt;
    }
    if (lamSamples.size() >= 2) {
        std::sort(lamSamples.begin(), lamSamples.end(),
                  [](auto& a, auto& b) { return a[0] < b[0]; });
        tr.lambdaSlope = fit_power_law(lamSamples).exponent;
        const double predicted = l_eps(1.0, p1.beta(), p2.beta(), dim).exponent / p1.beta();
        tr.lambdaSlopeOk = std::abs(tr.lambdaSlope - predicted) <= 0.2;
    }
    bool positivityAll = !rep.points.empty();
    for (const auto& pt : rep.points) positivityAll = positivityAll && pt.accepted && pt.positivity.pass;
    tr.pass = tr.vDecreasing && tr.yOffsetTrend && tr.alphaTrend && tr.lambdaSlopeOk;
    rep.allPass = tr.pass && positivityAll && rep.gDegree.degree == -1 && rep.productDegree == -1;
    rep.elapsedSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

json RunReport::toJson() const {
    json j;
    j["config"] = config.toJson();
    j["constants"] = json::array();
    for (const auto& r : constantsTable)
        j["constants"].push_back({{"name", r[0]},
                                  {"n", r[1]},
                                  {"beta", r[2]},
                                  {"value", r[3]},
                                  {"method", r[4]},
                                  {"crosscheck", r[5]},
                                  {"reldev", r[6]}});
    j["points"] = json::array();
    for (const auto& p : points) {
        json pj;
        pj["eps"] = p.eps;
        pj["accepted"] = p.accepted;
        pj["failure"] = p.failure;
        pj["alpha"] = p.alpha;
        pj["lambda"] = p.lambda;
        pj["yOffset"] = p.yOffset;
        pj["vNorm"] = p.vNorm;
        pj["fNorm"] = p.fNorm;
        pj["qInvNorm"] = p.qInvNorm;
        pj["iterations"] = p.iterations;
        pj["residualNorm"] = p.residualNorm;
        pj["tStar"] = p.tStar;
        pj["positivity"] = {{"pass", p.positivity.pass},
                            {"minValue", p.positivity.minValue},
                            {"negativePartLp", p.positivity.negativePartLp},
                            {"witness", p.positivity.witness}};
        j["points"].push_back(pj);
    }
    j["trends"] = {{"vDecreasing", trends.vDecreasing},
                   {"yOffsetTrend", trends.yOffsetTrend},
                   {"alphaTrend", trends.alphaTrend},
                   {"lambdaSlope", trends.lambdaSlope},
                   {"lambdaSlopeOk", trends.lambdaSlopeOk},
                   {"pass", trends.pass}};
    j["degree"] = {{"g", gDegree.degree},
                   {"winding", gDegree.totalWinding},
                   {"minBoundaryNorm", gDegree.minBoundaryNorm},
                   {"product", productDegree}};
    j["allPass"] = allPass;
    return j;
}

void emit_report(const RunReport& report, const std::string& outDir) {
    namespace fs = std::filesystem;
    fs::create_directories(outDir);
    const auto writeFile = [&](const std::string& name, const std::string& content) {
        const fs::path tmp = fs::path(outDir) / (name + ".tmp");
        const fs::path dst = fs::path(outDir) / name;
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw std::runtime_error("emit_report: cannot write " + tmp.string());
            out << content;
            if (!out) {
                fs::remove(tmp);
                throw std::runtime_error("emit_report: short write to " + tmp.string());
            }
        }
        fs::rename(tmp, dst);
    };
    writeFile("report.json", report.toJson().dump(2) + "\n");
    std::ostringstream sweep;
    sweep.precision(17);
    sweep << "eps,lambda1,lambda2,alpha1,alpha2,vNorm,yOffset1,yOffset2,fNorm,posMin,posNegLp\n";
    for (const auto& p : report.points)
        sweep << p.eps << "," << p.lambda[0] << "," << p.lambda[1] << "," << p.alpha[0] << ","
              << p.alpha[1] << "," << p.vNorm << "," << p.yOffset[0] << "," << p.yOffset[1] << ","
              << p.fNorm << "," << p.positivity.minValue << "," << p.positivity.negativePartLp
              << "\n";
    writeFile("sweep.csv", sweep.str());
    writeFile("constants.csv", constants_csv(report.constantsTable));
}

}  // namespace bubbleforge
