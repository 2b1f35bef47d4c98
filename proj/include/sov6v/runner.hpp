#ifndef SOV6V_RUNNER_HPP
#define SOV6V_RUNNER_HPP

// Configuration-driven batch driver: parse a JSON run configuration, execute
// the selected verification/computation suites deterministically, and emit a
// canonical JSON report plus CSV tables.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sov6v/formfactors.hpp"
#include "sov6v/tqinhom.hpp"

namespace sov6v {

using ordered_json = nlohmann::ordered_json;

// ---- configuration -----------------------------------------------------------

struct RunConfig {
    int N = 2;
    int x = 0;
    int y = 1;
    cplx omega{0.0, 1.0};
    cplx eta{0.377, 0.411};
    std::string xi_mode = "seeded-random"; // or "explicit"
    std::vector<cplx> xi;                  // used when xi_mode == "explicit"
    std::vector<cplx> kappa = {cplx(1.0, 0.0)};
    std::vector<std::string> suites;       // subset of the suite names below
    double tol = 0.0;                      // 0 = per-check default thresholds
    std::uint64_t seed = 7;
    std::string out = ".";
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> v = {"verify", "spectrum", "bethe", "tq-inhom",
                                               "formfactors"};
    return v;
}

inline cplx json_cplx(const ordered_json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail("ConfigError", path + ": expected a [re, im] pair");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

inline RunConfig parse_config(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        fail("ConfigError", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("ConfigError", "top level: expected an object");
    static const std::vector<std::string> known = {"N",  "x",      "y",      "omega",
                                                   "eta", "xi_mode", "xi",    "kappa",
                                                   "suites", "tol",  "seed",  "out"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            fail("ConfigError", "unknown field: " + it.key());
    RunConfig cfg;
    auto need_int = [&](const char* k, int& dst) {
        if (!j.contains(k)) return;
        if (!j[k].is_number_integer()) fail("ConfigError", std::string(k) + ": expected integer");
        dst = j[k].get<int>();
    };
    need_int("N", cfg.N);
    need_int("x", cfg.x);
    need_int("y", cfg.y);
    if (j.contains("omega")) cfg.omega = json_cplx(j["omega"], "omega");
    if (j.contains("eta")) cfg.eta = json_cplx(j["eta"], "eta");
    if (j.contains("xi_mode")) {
        if (!j["xi_mode"].is_string()) fail("ConfigError", "xi_mode: expected string");
        cfg.xi_mode = j["xi_mode"].get<std::string>();
        if (cfg.xi_mode != "seeded-random" && cfg.xi_mode != "explicit")
            fail("ConfigError", "xi_mode: expected 'seeded-random' or 'explicit'");
    }
    if (j.contains("xi")) {
        if (!j["xi"].is_array()) fail("ConfigError", "xi: expected array");
        for (std::size_t i = 0; i < j["xi"].size(); ++i)
            cfg.xi.push_back(json_cplx(j["xi"][i], "xi[" + std::to_string(i) + "]"));
        if (!j.contains("xi_mode")) cfg.xi_mode = "explicit";
    }
    if (j.contains("kappa")) {
        if (!j["kappa"].is_array() || j["kappa"].empty())
            fail("ConfigError", "kappa: expected non-empty array");
        cfg.kappa.clear();
        for (std::size_t i = 0; i < j["kappa"].size(); ++i)
            cfg.kappa.push_back(json_cplx(j["kappa"][i], "kappa[" + std::to_string(i) + "]"));
    }
    if (j.contains("suites")) {
        if (!j["suites"].is_array()) fail("ConfigError", "suites: expected array");
        for (const auto& s : j["suites"]) {
            if (!s.is_string()) fail("ConfigError", "suites: expected strings");
            const std::string name = s.get<std::string>();
            if (std::find(suite_names().begin(), suite_names().end(), name) ==
                suite_names().end())
                fail("ConfigError", "suites: unknown suite '" + name + "'");
            cfg.suites.push_back(name);
        }
    }
    if (j.contains("tol")) {
        if (!j["tol"].is_number()) fail("ConfigError", "tol: expected number");
        cfg.tol = j["tol"].get<double>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            fail("ConfigError", "seed: expected integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) fail("ConfigError", "out: expected string");
        cfg.out = j["out"].get<std::string>();
    }
    // eager model validation (parity rule, explicit-xi non-degeneracy)
    if (cfg.xi_mode == "explicit" && int(cfg.xi.size()) != cfg.N)
        fail("ConfigError", "xi: expected exactly N entries in explicit mode");
    if (cfg.x == 0 && cfg.y == 0 && cfg.N % 2 == 0)
        fail("InvalidModel", "(x,y)=(0,0) requires N odd");
    if (cfg.xi_mode == "explicit") {
        ModelParams probe;
        probe.theta.omega = cfg.omega;
        probe.eta = cfg.eta;
        probe.x = cfg.x;
        probe.y = cfg.y;
        probe.N = cfg.N;
        probe.xi = cfg.xi;
        probe.kappa = cfg.kappa[0];
        probe.validate();
    }
    return cfg;
}

inline ordered_json config_json(const RunConfig& cfg) {
    auto cp = [](cplx z) { return ordered_json::array({z.real(), z.imag()}); };
    ordered_json j;
    j["N"] = cfg.N;
    j["x"] = cfg.x;
    j["y"] = cfg.y;
    j["omega"] = cp(cfg.omega);
    j["eta"] = cp(cfg.eta);
    j["xi_mode"] = cfg.xi_mode;
    j["xi"] = ordered_json::array();
    for (auto z : cfg.xi) j["xi"].push_back(cp(z));
    j["kappa"] = ordered_json::array();
    for (auto z : cfg.kappa) j["kappa"].push_back(cp(z));
    j["suites"] = cfg.suites;
    j["tol"] = cfg.tol;
    j["seed"] = cfg.seed;
    j["out"] = cfg.out;
    return j;
}

inline std::string serialize_config(const RunConfig& cfg) { return config_json(cfg).dump(2); }

inline ModelParams params_from(const RunConfig& cfg, std::size_t kappa_index = 0) {
    if (kappa_index >= cfg.kappa.size()) fail("ConfigError", "kappa index out of range");
    if (cfg.xi_mode == "seeded-random")
        return make_params(cfg.N, cfg.x, cfg.y, cfg.seed, cfg.omega, cfg.eta,
                           cfg.kappa[kappa_index]);
    ModelParams par;
    par.theta.omega = cfg.omega;
    par.eta = cfg.eta;
    par.x = cfg.x;
    par.y = cfg.y;
    par.N = cfg.N;
    par.xi = cfg.xi;
    par.kappa = cfg.kappa[kappa_index];
    par.validate();
    return par;
}

inline int env_threads() {
    const char* s = std::getenv("SOV6V_THREADS");
    if (s == nullptr) return 1;
    const int v = std::atoi(s);
    return v < 1 ? 1 : v;
}

// ---- report -------------------------------------------------------------------

struct CheckRow {
    std::string suite;
    std::string id;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct RunReport {
    RunConfig cfg;
    std::vector<CheckRow> checks;
    std::vector<std::vector<cplx>> eigenvalues; // [k][a] = t_k(xi_a)
    std::vector<std::vector<cplx>> bethe_roots; // [k][j]
    std::vector<std::vector<cplx>> inhom_roots; // [k][j]
    std::vector<cplx> inhom_alpha;              // [k] root-sum norm
    std::vector<FormFactorReport> ff;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// ---- suites -------------------------------------------------------------------

namespace detail {

inline void add_check(RunReport& rep, const RunConfig& cfg, const std::string& suite,
                      const std::string& id, double residual, double default_threshold) {
    CheckRow c;
    c.suite = suite;
    c.id = id;
    c.residual = residual;
    c.threshold = cfg.tol > 0.0 ? cfg.tol : default_threshold;
    c.pass = residual < c.threshold;
    rep.checks.push_back(c);
}

// The split-operator construction is valid for any choice of the per-site
// mask, but a specific mask can annihilate the reference state when a Q-root
// coincides with a shifted inhomogeneity.  Try masks in order until one works.
inline Vec eigenstate_via_dbeta_any(const SovBasis& sb, const QFunction& q) {
    const unsigned full = 1u << sb.space().params().N;
    for (unsigned mask = 0; mask < full; ++mask) {
        try {
            return eigenstate_via_dbeta(sb, q, mask);
        } catch (const Error& e) {
            if (e.code() != "ZeroReference" || mask + 1 == full) throw;
        }
    }
    fail("ZeroReference", "all split-operator masks annihilate the reference state");
}

inline double collinearity_gap(const Vec& v, const Vec& ref) {
    const cplx proj = (ref.adjoint() * v)(0, 0) / (ref.adjoint() * ref)(0, 0);
    return (v - proj * ref).norm() / v.norm();
}

inline void run_verify(RunReport& rep, const RunConfig& cfg, const ModelParams& par,
                       const RepSpace& rs) {
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    // theta quasi-periodicity at random points
    double qp = 0.0;
    for (int t = 0; t < 100; ++t) {
        const cplx z = rng.box(-2.0, 2.0, -1.0, 1.0);
        const cplx th = theta1(z, par.theta);
        const double sc = std::max(1.0, std::abs(th));
        qp = std::max(qp, std::abs(theta1(z + PI, par.theta) + th) / sc);
        const cplx mult = -std::exp(-1.0i * PI * par.theta.omega) * std::exp(-2.0i * z);
        qp = std::max(qp,
                      std::abs(theta1(z + PI * par.theta.omega, par.theta) - mult * th) /
                          (std::abs(mult) * sc));
    }
    add_check(rep, cfg, "verify", "theta-quasi-periodicity", qp, 1e-12);
    // dynamical Yang-Baxter equation and (for y=1) the diagonal gauge identity
    double dybe = 0.0, gauge = 0.0;
    for (int t = 0; t < 50; ++t) {
        const cplx l1 = rng.box(-1.0, 1.0, -0.3, 0.3);
        const cplx l2 = rng.box(-1.0, 1.0, -0.3, 0.3);
        const cplx l3 = rng.box(-1.0, 1.0, -0.3, 0.3);
        const cplx tv = rng.box(-1.0, 1.0, 0.2, 0.8);
        dybe = std::max(dybe, dybe_residual(l1, l2, l3, tv, par));
        if (par.y == 1) gauge = std::max(gauge, gauge_y1_residual(l1, l2, tv, par));
    }
    add_check(rep, cfg, "verify", "dynamical-ybe", dybe, 1e-11);
    if (par.y == 1) add_check(rep, cfg, "verify", "diagonal-gauge", gauge, 1e-11);
    // commutativity of the transfer family on the r=0 sector
    {
        const cplx l1 = rng.box(-1.0, 1.0, -0.3, 0.3);
        const cplx l2 = rng.box(-1.0, 1.0, -0.3, 0.3);
        const Mat T1 = rs.transfer_sector(l1, 0);
        const Mat T2 = rs.transfer_sector(l2, 0);
        const double sc = std::max(1.0, T1.cwiseAbs().maxCoeff() * T2.cwiseAbs().maxCoeff());
        add_check(rep, cfg, "verify", "transfer-commutativity",
                  (T1 * T2 - T2 * T1).cwiseAbs().maxCoeff() / sc, 1e-10);
    }
    // quantum determinant (both orderings) and the two-sided inversion
    {
        const cplx lam = rng.box(-1.0, 1.0, -0.3, 0.3);
        const MonodromyBlocks c1 = rs.monodromy_cal(lam);
        const MonodromyBlocks c2 = rs.monodromy_cal(lam - par.eta);
        const cplx qdet = par.a_fn(lam) * par.d_fn(lam - par.eta);
        const Mat W = rs.inv_weight_diag().asDiagonal();
        const double sc = std::abs(qdet);
        const double r1 = rs.residual_interior(c1.A * c2.D - c1.B * c2.C - qdet * W) / sc;
        const double r2 = rs.residual_interior(c1.D * c2.A - c1.C * c2.B - qdet * W) / sc;
        add_check(rep, cfg, "verify", "quantum-determinant", std::max(r1, r2), 1e-10);
        const double o1 = rs.residual_interior(c1.B * c2.A - c1.A * c2.B) / sc;
        const double o2 = rs.residual_interior(c1.C * c2.D - c1.D * c2.C) / sc;
        add_check(rep, cfg, "verify", "monodromy-inversion", std::max(o1, o2), 1e-10);
    }
}

inline void run_spectrum(RunReport& rep, const RunConfig& cfg, const ModelParams& par,
                         const RepSpace& rs, const BruteSpectrum& bs, const SovBasis& sb) {
    const int ns = rs.n_spin();
    double disc = 0.0, overlap = 0.0;
    for (int k = 0; k < ns; ++k) {
        rep.eigenvalues.push_back(bs.tvals[std::size_t(k)]);
        disc = std::max(disc, discrete_residual(par, bs.tvals[std::size_t(k)]));
        const Vec full = sov_right_state(sb, q_table(par, bs.tvals[std::size_t(k)]));
        const auto idx = rs.sector_indices(0);
        Vec v(ns);
        for (int i = 0; i < ns; ++i) v(i) = full(idx[std::size_t(i)]);
        overlap = std::max(overlap, collinearity_gap(v, Vec(bs.V.col(k))));
    }
    add_check(rep, cfg, "spectrum", "discrete-system", disc, 1e-9);
    add_check(rep, cfg, "spectrum", "separate-state-overlap", overlap, 1e-8);
    if (par.N <= 3) {
        const auto sols = solve_discrete_system(par);
        double worst = sols.size() == (1u << par.N) ? 0.0 : 1.0;
        double scale = 0.0;
        for (const auto& tv : bs.tvals)
            for (auto v : tv) scale = std::max(scale, std::abs(v));
        for (const auto& tv : bs.tvals) {
            double best = 1e300;
            for (const auto& s : sols) {
                double d = 0.0;
                for (int a = 0; a < par.N; ++a)
                    d = std::max(d, std::abs(tv[std::size_t(a)] - s[std::size_t(a)]));
                best = std::min(best, d);
            }
            worst = std::max(worst, best / scale);
        }
        add_check(rep, cfg, "spectrum", "newton-enumeration", worst, 1e-6);
    }
    if (cfg.kappa.size() >= 2) {
        double iso = 0.0;
        double scale = 0.0;
        for (auto e : bs.eig) scale = std::max(scale, std::abs(e));
        for (std::size_t ki = 1; ki < cfg.kappa.size(); ++ki) {
            RepSpace rs2(params_from(cfg, ki));
            const BruteSpectrum bs2 = brute_spectrum(rs2);
            for (auto e : bs.eig) {
                double best = 1e300;
                for (auto e2 : bs2.eig) best = std::min(best, std::abs(e - e2));
                iso = std::max(iso, best / scale);
            }
        }
        add_check(rep, cfg, "spectrum", "kappa-isospectrality", iso, 1e-10);
    }
}

inline void run_bethe(RunReport& rep, const RunConfig& cfg, const ModelParams& par,
                      const RepSpace& rs, const BruteSpectrum& bs, const SovBasis& sb) {
    if (par.N % 2 != 0 || (par.x == 0 && par.y == 0))
        fail("ConfigError", "bethe suite requires even N and (x,y) != (0,0)");
    const int ns = rs.n_spin();
    double nullr = 0.0, beth = 0.0, sumr = 0.0, wron = 0.0, coll = 0.0;
    for (int k = 0; k < ns; ++k) {
        const auto& tv = bs.tvals[std::size_t(k)];
        const QSolveResult res = q_solve_homogeneous(par, tv);
        rep.bethe_roots.push_back(res.q.roots);
        nullr = std::max(nullr, res.smin / res.smax);
        for (double r : bethe_residuals(res.q, par)) beth = std::max(beth, r);
        sumr = std::max(sumr, sum_rule_check(res.q, par));
        const WronskianReport wr = wronskian_checks(res.q, par);
        wron = std::max({wron, wr.rel1, wr.rel2});
        const Vec v = eigenstate_via_dbeta_any(sb, res.q);
        const Vec ref = sov_right_state(sb, q_table(par, tv));
        coll = std::max(coll, collinearity_gap(v, ref));
    }
    add_check(rep, cfg, "bethe", "q-null-space", nullr, 1e-8);
    add_check(rep, cfg, "bethe", "bethe-residuals", beth, 1e-8);
    add_check(rep, cfg, "bethe", "root-sum-rule", sumr, 1e-8);
    add_check(rep, cfg, "bethe", "wronskian-relations", wron, 1e-8);
    add_check(rep, cfg, "bethe", "split-operator-eigenstate", coll, 1e-7);
}

inline void run_tqinhom(RunReport& rep, const RunConfig& cfg, const ModelParams& par,
                        const RepSpace& rs, const BruteSpectrum& bs, const SovBasis& sb) {
    const InhomGauge g = make_gauge(par, cplx(0.3, 0.0));
    Rng rng(cfg.seed ^ 0x2545f4914f6cdd1dULL);
    const int ns = rs.n_spin();
    double special = 0.0, rand_res = 0.0, detgap = 0.0, detval = 0.0, coll = 0.0;
    for (int k = 0; k < ns; ++k) {
        const auto& tv = bs.tvals[std::size_t(k)];
        const QInhomResult res = q_inhom_solve(par, tv, g);
        rep.inhom_roots.push_back(res.q.roots);
        rep.inhom_alpha.push_back(res.alphaQ);
        special = std::max(special, res.special_residual);
        for (int t = 0; t < 20; ++t)
            rand_res = std::max(rand_res, inhom_residual(par, tv, g, res.q,
                                                         rng.box(-1.0, 1.0, -0.3, 0.3)));
        const CDet cd = c_matrix_det(par, tv, g.beta, res.alphaQ, g);
        detgap = std::max(detgap, std::abs(cd.direct - cd.expansion) / cd.scale);
        detval = std::max(detval, std::abs(cd.direct) / cd.scale);
        const Vec v = eigenstate_via_inhom(sb, res.q.roots, g);
        const Vec ref = sov_right_state(sb, q_table(par, tv));
        coll = std::max(coll, collinearity_gap(v, ref));
    }
    add_check(rep, cfg, "tq-inhom", "construction-point-residual", special, 1e-11);
    add_check(rep, cfg, "tq-inhom", "random-point-residual", rand_res, 1e-8);
    add_check(rep, cfg, "tq-inhom", "determinant-methods", detgap, 1e-10);
    add_check(rep, cfg, "tq-inhom", "branch-determinant-zero", detval, 1e-9);
    add_check(rep, cfg, "tq-inhom", "bethe-form-eigenstate", coll, 1e-7);
}

inline void run_formfactors(RunReport& rep, const RunConfig& cfg, const RepSpace& rs) {
    const double thr = cfg.tol > 0.0 ? cfg.tol : 1e-7;
    rep.ff = ff_crosscheck_suite(rs, thr, env_threads());
    double worst = 0.0;
    for (const auto& r : rep.ff) worst = std::max(worst, r.residual);
    add_check(rep, cfg, "formfactors", "crosscheck-suite", worst, 1e-7);
}

} // namespace detail

inline RunReport run_suite(const RunConfig& cfg) {
    RunReport rep;
    rep.cfg = cfg;
    auto want = [&](const char* s) {
        return std::find(cfg.suites.begin(), cfg.suites.end(), s) != cfg.suites.end();
    };
    if (cfg.suites.empty()) return rep;
    const ModelParams par = params_from(cfg, 0);
    RepSpace rs(par);
    if (want("verify")) detail::run_verify(rep, cfg, par, rs);
    const bool heavy = want("spectrum") || want("bethe") || want("tq-inhom");
    if (heavy) {
        const BruteSpectrum bs = brute_spectrum(rs);
        const SovBasis sb(rs, 0);
        if (want("spectrum")) detail::run_spectrum(rep, cfg, par, rs, bs, sb);
        if (want("bethe")) detail::run_bethe(rep, cfg, par, rs, bs, sb);
        if (want("tq-inhom")) detail::run_tqinhom(rep, cfg, par, rs, bs, sb);
    }
    if (want("formfactors")) detail::run_formfactors(rep, cfg, rs);
    return rep;
}

// ---- emission -----------------------------------------------------------------

inline ordered_json report_json_object(const RunReport& rep) {
    auto cp = [](cplx z) { return ordered_json::array({z.real(), z.imag()}); };
    ordered_json j;
    j["config"] = config_json(rep.cfg);
    j["checks"] = ordered_json::array();
    for (const auto& c : rep.checks) {
        ordered_json row;
        row["suite"] = c.suite;
        row["id"] = c.id;
        row["residual"] = c.residual;
        row["threshold"] = c.threshold;
        row["pass"] = c.pass;
        j["checks"].push_back(row);
    }
    auto table = [&](const std::vector<std::vector<cplx>>& rows) {
        ordered_json t = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json row = ordered_json::array();
            for (auto z : r) row.push_back(cp(z));
            t.push_back(row);
        }
        return t;
    };
    j["eigenvalues"] = table(rep.eigenvalues);
    j["bethe_roots"] = table(rep.bethe_roots);
    j["inhom_roots"] = table(rep.inhom_roots);
    j["inhom_alpha"] = ordered_json::array();
    for (auto z : rep.inhom_alpha) j["inhom_alpha"].push_back(cp(z));
    j["form_factors"] = ordered_json::array();
    for (const auto& r : rep.ff) {
        ordered_json row;
        row["formula"] = r.formula;
        row["bra"] = r.bra;
        row["ket"] = r.ket;
        row["site"] = r.site;
        row["height"] = r.height;
        row["value"] = cp(r.det_value);
        row["oracle"] = cp(r.oracle);
        row["residual"] = r.residual;
        row["pass"] = r.pass;
        j["form_factors"].push_back(row);
    }
    j["all_pass"] = rep.all_pass();
    return j;
}

inline std::string report_json(const RunReport& rep) { return report_json_object(rep).dump(2); }

namespace detail {

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("IOError", "cannot open " + path);
    f << content;
    if (!f) fail("IOError", "write failed for " + path);
}

} // namespace detail

// Writes report.json plus CSV tables for the non-empty result sets.
inline void emit_report(const RunReport& rep, const std::string& dir) {
    const std::string base = dir.empty() ? std::string(".") : dir;
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    detail::write_file(base + "/report.json", report_json(rep) + "\n");
    if (!rep.eigenvalues.empty()) {
        std::string csv = "index";
        for (std::size_t a = 1; a <= rep.eigenvalues[0].size(); ++a)
            csv += ",re_t_xi" + std::to_string(a) + ",im_t_xi" + std::to_string(a);
        csv += "\n";
        for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k) {
            csv += std::to_string(k);
            for (auto z : rep.eigenvalues[k])
                csv += "," + detail::fmt_g(z.real()) + "," + detail::fmt_g(z.imag());
            csv += "\n";
        }
        detail::write_file(base + "/eigenvalues.csv", csv);
    }
    auto roots_csv = [&](const std::vector<std::vector<cplx>>& rows, const std::string& name) {
        if (rows.empty()) return;
        std::string csv = "eigenvalue_index,root_index,re,im\n";
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::size_t r = 0; r < rows[k].size(); ++r)
                csv += std::to_string(k) + "," + std::to_string(r) + "," +
                       detail::fmt_g(rows[k][r].real()) + "," + detail::fmt_g(rows[k][r].imag()) +
                       "\n";
        detail::write_file(base + "/" + name, csv);
    };
    roots_csv(rep.bethe_roots, "bethe_roots.csv");
    roots_csv(rep.inhom_roots, "inhom_roots.csv");
    if (!rep.ff.empty()) {
        // one row per (pair, site, operator): the two diagonal spin projectors
        // (first determinant branch) and the N+1 height projectors
        std::string csv = "bra,ket,site,operator,re,im,oracle_re,oracle_im,residual\n";
        for (const auto& r : rep.ff) {
            if (r.formula == "spin-pp-second" || r.formula == "spin-mm-second") continue;
            std::string op = r.formula == "height" ? "height" + std::to_string(r.height)
                                                   : r.formula.substr(0, 7);
            csv += std::to_string(r.bra) + "," + std::to_string(r.ket) + "," +
                   std::to_string(r.site) + "," + op + "," + detail::fmt_g(r.det_value.real()) +
                   "," + detail::fmt_g(r.det_value.imag()) + "," +
                   detail::fmt_g(r.oracle.real()) + "," + detail::fmt_g(r.oracle.imag()) + "," +
                   detail::fmt_g(r.residual) + "\n";
        }
        detail::write_file(base + "/formfactors.csv", csv);
    }
}

} // namespace sov6v

#endif // SOV6V_RUNNER_HPP
