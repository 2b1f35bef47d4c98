#ifndef SOV6V_TQINHOM_HPP
#define SOV6V_TQINHOM_HPP

// Inhomogeneous Baxter-type functional layer.  A two-parameter gauge function
// twists the quantum-determinant coefficients without changing their product,
// and a compensating inhomogeneous term (vanishing at every construction
// point) makes the functional equation admit plain theta-product solutions of
// order N in every parity sector.  The Q-values at the inhomogeneities solve
// an N x N homogeneous linear system whose determinant condition fixes the
// root sum as an implicit branch in the gauge strength; the eigenstates take
// a Bethe form: repeated action of the diagonal dynamical operator, dressed
// by the height weight, on a gauge-dependent reference state.

#include "sov6v/tq.hpp"

namespace sov6v {

// ---- gauge function ---------------------------------------------------------

struct InhomGauge {
    cplx beta{0.3, 0.0};  // gauge strength (nonzero wherever f itself is used)
    cplx mu = 0.0;        // gauge reference point
    int M = 0;            // degree of the Q-product
};

// Default gauge: degree = chain length, mu a fixed generic offset from the
// base height, rejected against the excluded lattice translates.
inline InhomGauge make_gauge(const ModelParams& par, cplx beta,
                             cplx mu_offset = cplx(0.3, 0.21)) {
    InhomGauge g;
    g.beta = beta;
    g.M = par.N;
    const cplx t00 = par.t_rh(0, 0u);
    g.mu = t00 + mu_offset;
    const double band = lattice_band(par.theta);
    for (int j = 1; j <= par.N; ++j) {
        const cplx xj = par.xi[std::size_t(j - 1)];
        const cplx excl[4] = {g.mu + double(par.N - g.M) * par.eta - xj,
                              g.mu + double(par.N - g.M - 1) * par.eta - xj,
                              g.mu - t00 - xj,
                              g.mu + par.eta - t00 - xj};
        for (const cplx& z : excl)
            if (lattice_distance(z, par.theta) < band)
                fail("PoleOnLattice", "gauge point hits an excluded lattice translate");
    }
    return g;
}

//   f(lam) = beta^{-1} e^{-i y lam} theta(lam - mu + (M-N) eta)/theta(lam - mu + t_{0,0})
inline cplx gauge_f(const ModelParams& par, const InhomGauge& g, cplx lam) {
    if (std::abs(g.beta) == 0.0) fail("ConfigError", "gauge strength must be nonzero");
    const cplx t00 = par.t_rh(0, 0u);
    if (on_lattice(lam - g.mu + t00, par.theta))
        fail("PoleOnLattice", "gauge denominator vanishes");
    return std::exp(-1i * double(par.y) * lam) / g.beta *
           theta1(lam - g.mu + double(g.M - par.N) * par.eta, par.theta) /
           theta1(lam - g.mu + t00, par.theta);
}

// ---- inhomogeneous term -----------------------------------------------------

// Compensating term of the functional equation for a degree-N product Q; its
// own prefactor in the equation carries the zero pattern at the construction
// points.  The root sum of Q enters through the two balancing theta ratios.
inline cplx inhom_term_F(const ModelParams& par, const InhomGauge& g, const QFunction& q,
                         cplx lam) {
    if (std::abs(g.beta) == 0.0) fail("ConfigError", "gauge strength must be nonzero");
    const cplx t00 = par.t_rh(0, 0u);
    cplx aq = 0.0;
    for (auto r : q.roots) aq += r;
    cplx xs = 0.0;
    for (auto z : par.xi) xs += z;
    const cplx gap = aq - xs + double(par.N) * par.eta;  // root sum minus its base value
    const cplx ypw = double(par.y) * PI * par.theta.omega;
    const cplx dens[4] = {t00 + gap, ypw - t00 - gap, lam - g.mu + t00, lam - g.mu + par.eta};
    for (const cplx& z : dens)
        if (on_lattice(z, par.theta))
            fail("PoleOnLattice", "inhomogeneous-term denominator vanishes");
    const cplx term1 = par.sign_xy() / g.beta * std::exp(-1i * double(par.y) * lam) *
                       theta1(t00, par.theta) / theta1(t00 + gap, par.theta) *
                       q(g.mu - par.eta - t00) / par.d_fn(g.mu - t00) *
                       theta1(lam - g.mu - gap, par.theta) /
                       theta1(lam - g.mu + t00, par.theta);
    const cplx term2 = g.beta * std::exp(1i * double(par.y) * (lam + par.eta)) *
                       theta1(t00, par.theta) / theta1(ypw - t00 - gap, par.theta) *
                       q(g.mu) / par.a_fn(g.mu - par.eta) *
                       theta1(lam - g.mu + par.eta + ypw - t00 - gap, par.theta) /
                       theta1(lam - g.mu + par.eta, par.theta);
    return term1 + term2;
}

// Right-hand side of the inhomogeneous functional equation.
inline cplx inhom_rhs(const ModelParams& par, const InhomGauge& g, const QFunction& q,
                      cplx lam) {
    return gauge_f(par, g, lam) * par.axy_fn(lam) * q(lam - par.eta) +
           par.d_fn(lam) / gauge_f(par, g, lam + par.eta) * q(lam + par.eta) -
           par.a_fn(lam) * par.d_fn(lam) * inhom_term_F(par, g, q, lam);
}

// Normalized residual of the functional equation at one point.
inline double inhom_residual(const ModelParams& par, const std::vector<cplx>& tvals,
                             const InhomGauge& g, const QFunction& q, cplx lam) {
    const cplx lhs = t_interp(par, tvals, lam) * q(lam);
    const cplx u = gauge_f(par, g, lam) * par.axy_fn(lam) * q(lam - par.eta);
    const cplx w = par.d_fn(lam) / gauge_f(par, g, lam + par.eta) * q(lam + par.eta);
    const cplx ff = par.a_fn(lam) * par.d_fn(lam) * inhom_term_F(par, g, q, lam);
    return std::abs(lhs - u - w + ff) /
           std::max({std::abs(lhs), std::abs(u), std::abs(w), std::abs(ff), 1e-300});
}

// ---- linear system for the Q-values -----------------------------------------

// N x N matrix whose null vector carries the Q-values at the inhomogeneities:
// diagonal gauge-weighted eigenvalue ratio minus the eta-shifted interpolation
// weights in the order-N space with root sum alphaQ.
inline Mat c_matrix(const ModelParams& par, const std::vector<cplx>& tvals, cplx beta,
                    cplx alphaQ, const InhomGauge& g) {
    cplx xs = 0.0;
    for (auto z : par.xi) xs += z;
    if (lattice_distance(xs - alphaQ, par.theta) < lattice_band(par.theta))
        fail("IndependenceViolation", "root-sum parameter collides with the lattice");
    const cplx t00 = par.t_rh(0, 0u);
    Mat C(par.N, par.N);
    for (int a = 1; a <= par.N; ++a) {
        const cplx xa = par.xi[std::size_t(a - 1)];
        for (int b = 1; b <= par.N; ++b) {
            const cplx xb = par.xi[std::size_t(b - 1)];
            cplx w = theta1(xa - xb - par.eta + xs - alphaQ, par.theta) /
                     theta1(xs - alphaQ, par.theta);
            for (int l = 1; l <= par.N; ++l) {
                if (l == b) continue;
                const cplx xl = par.xi[std::size_t(l - 1)];
                w *= theta1(xa - xl - par.eta, par.theta) / theta1(xb - xl, par.theta);
            }
            C(a - 1, b - 1) = -w;
        }
        C(a - 1, a - 1) += beta * std::exp(1i * double(par.y) * xa) *
                           tvals[std::size_t(a - 1)] / par.axy_fn(xa) *
                           theta1(xa - g.mu + t00, par.theta) / theta1(xa - g.mu, par.theta);
    }
    return C;
}

struct CDet {
    cplx direct;      // LU determinant
    cplx expansion;   // subset expansion over the diagonal part
    double scale;     // cancellation-aware magnitude of the expansion
};

inline CDet c_matrix_det(const ModelParams& par, const std::vector<cplx>& tvals, cplx beta,
                         cplx alphaQ, const InhomGauge& g) {
    CDet out;
    out.direct = c_matrix(par, tvals, beta, alphaQ, g).partialPivLu().determinant();
    cplx xs = 0.0;
    for (auto z : par.xi) xs += z;
    const cplx t00 = par.t_rh(0, 0u);
    const cplx den = theta1(xs - alphaQ, par.theta);
    cplx sum = 0.0;
    double mag = 0.0;
    for (unsigned P = 0; P < (1u << par.N); ++P) {
        const int n = __builtin_popcount(P);
        cplx term = theta1(xs - alphaQ - double(n) * par.eta, par.theta) / den;
        for (int k = 0; k < par.N - n; ++k) term *= beta;
        if (n % 2) term = -term;
        for (int a = 1; a <= par.N; ++a) {
            if ((P >> (a - 1)) & 1) continue;
            const cplx xa = par.xi[std::size_t(a - 1)];
            cplx f = std::exp(1i * double(par.y) * xa) * tvals[std::size_t(a - 1)] /
                     par.axy_fn(xa) * theta1(xa - g.mu + t00, par.theta) /
                     theta1(xa - g.mu, par.theta);
            for (int b = 1; b <= par.N; ++b)
                if ((P >> (b - 1)) & 1) {
                    const cplx xb = par.xi[std::size_t(b - 1)];
                    f *= theta1(xa - xb + par.eta, par.theta) / theta1(xa - xb, par.theta);
                }
            term *= f;
        }
        sum += term;
        mag = std::max(mag, std::abs(term));
    }
    out.expansion = sum;
    out.scale = std::max(mag, 1e-300);
    return out;
}

// ---- implicit root-sum branch -----------------------------------------------

struct AlphaSample {
    cplx beta;
    cplx alpha;
    double absdet = 0.0;  // |det C| at the solved root sum
    double scale = 0.0;   // |det C| away from the zero (reference magnitude)
};

// Newton continuation of det C(beta, alpha) = 0 along a path in the gauge
// strength, starting from the closed-form zero at vanishing strength.
inline std::vector<AlphaSample> solve_alpha_branch(const ModelParams& par,
                                                   const std::vector<cplx>& tvals,
                                                   const InhomGauge& g,
                                                   const std::vector<cplx>& beta_path) {
    cplx xs = 0.0;
    for (auto z : par.xi) xs += z;
    cplx alpha = xs - double(par.N) * par.eta;
    std::vector<AlphaSample> out;
    const double h = 1e-6;
    for (cplx beta : beta_path) {
        auto det = [&](cplx a) {
            return c_matrix(par, tvals, beta, a, g).partialPivLu().determinant();
        };
        const double scale = std::max(std::abs(det(alpha + cplx(0.37, 0.11))), 1e-300);
        cplx d0 = det(alpha);
        for (int it = 0; it < 60 && std::abs(d0) > 1e-13 * scale; ++it) {
            const cplx dp = (det(alpha + h) - det(alpha - h)) / (2.0 * h);
            if (std::abs(dp) == 0.0) break;
            cplx step = d0 / dp;
            bool moved = false;
            for (int halve = 0; halve < 30; ++halve) {
                const cplx dn = det(alpha - step);
                if (std::abs(dn) < std::abs(d0)) {
                    alpha -= step;
                    d0 = dn;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (std::abs(d0) > 1e-10 * scale)
            fail("BranchLost", "root-sum continuation stalled at gauge strength " +
                                   std::to_string(std::abs(beta)));
        out.push_back({beta, alpha, std::abs(d0), scale});
    }
    return out;
}

// ---- Q recovery -------------------------------------------------------------

struct QInhomResult {
    InhomGauge gauge;
    cplx alphaQ;
    Vec qvals;                      // Q at the inhomogeneities (null vector)
    QFunction q;                    // theta-product with root sum alphaQ
    double smin = 0.0, smax = 0.0;  // singular-value diagnostics
    double special_residual = 0.0;  // equation residual at the construction points
};

inline QInhomResult q_inhom_solve(const ModelParams& par, const std::vector<cplx>& tvals,
                                  const InhomGauge& g, int steps = 10,
                                  double null_tol = 1e-6) {
    std::vector<cplx> path;
    for (int k = 0; k <= steps; ++k) path.push_back(g.beta * double(k) / double(steps));
    const auto branch = solve_alpha_branch(par, tvals, g, path);
    QInhomResult out;
    out.gauge = g;
    out.alphaQ = branch.back().alpha;
    Mat C = c_matrix(par, tvals, g.beta, out.alphaQ, g);
    Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    out.smax = s(0);
    out.smin = s(par.N - 1);
    if (out.smin > null_tol * out.smax)
        fail("NoNullVector", "linear system has no null vector on the solved branch");
    out.qvals = svd.matrixV().col(par.N - 1);
    // interpolation space pinned at the inhomogeneities with the solved norm
    QSpace qs;
    qs.variant = ThetaVariant::STD;
    qs.p = par.theta;
    qs.sigma = out.alphaQ;
    for (auto z : par.xi) {
        qs.nodes.push_back(z);
        qs.node_sum += z;
    }
    out.q.variant = ThetaVariant::STD;
    out.q.theta = par.theta;
    out.q.sigma = out.alphaQ;
    out.q.roots = locate_roots(qs, out.qvals, par.N);
    {
        auto [T1, T2] = variant_lattice(ThetaVariant::STD, par.theta);
        cplx rsum = 0.0;
        for (auto r : out.q.roots) rsum += r;
        auto [u, v] = cell_coords(rsum - out.alphaQ, T1, T2);
        out.q.roots[0] -= std::round(u) * T1 + std::round(v) * T2;
    }
    auto prod = [&](cplx lam) {
        cplx v = 1.0;
        for (auto r : out.q.roots) v *= theta1(lam - r, par.theta);
        return v;
    };
    out.q.scale = out.qvals(0) / prod(par.xi[0]);
    const double vscale = out.qvals.cwiseAbs().maxCoeff();
    for (int a = 1; a < par.N; ++a)
        if (std::abs(out.q.scale * prod(par.xi[std::size_t(a)]) - out.qvals(a)) > 1e-6 * vscale)
            fail("QReconstruct", "product form does not match the null vector");
    // admissibility and the residual at the construction points
    for (int j = 1; j <= par.N; ++j) {
        const cplx q0 = out.q(par.xi_shift(j, 0));
        const cplx q1 = out.q(par.xi_shift(j, 1));
        if (std::max(std::abs(q0), std::abs(q1)) < 1e-8 * std::abs(out.q.scale))
            fail("AdmissibilityFailure", "Q vanishes at both shifted points of site " +
                                             std::to_string(j));
        for (int hh = 0; hh < 2; ++hh)
            out.special_residual =
                std::max(out.special_residual,
                         inhom_residual(par, tvals, g, out.q, par.xi_shift(j, hh)));
    }
    return out;
}

// ---- Bethe-form eigenstates -------------------------------------------------

// One step of the height-dressed diagonal operator in SOV coordinates:
//   e^{-i y t_{r,h}} theta(t_{r,h})^{-1} d_{r,h}(lam)
// The theta denominator cancels the height ratio of the shift coefficient and
// the phase cancels its residual height dependence, so the step factor is a
// plain theta product over the sites up to a label-independent constant.
inline cplx dstep_coeff(const ModelParams& par, int r, unsigned h, cplx lam) {
    return std::exp(-1i * double(par.y) * par.t_rh(r, h)) / theta1(par.t_rh(r, h), par.theta) *
           d_shift_coeff(par, r, h, lam);
}

// Right eigenstate: M dressed diagonal operators at the Q-roots applied to the
// gauge reference state of the sector at minus the degree; the chain ends in
// the physical sector, whose basis is supplied by the caller.
inline Vec eigenstate_via_inhom(const SovBasis& sb0, const std::vector<cplx>& roots,
                                const InhomGauge& g) {
    const ModelParams& par = sb0.space().params();
    if (sb0.r() != 0) fail("ConfigError", "expected the physical-sector basis");
    if (int(roots.size()) != g.M) fail("ConfigError", "root count differs from the degree");
    sb0.space().sector_indices(-g.M);  // throws WindowOverflow when out of range
    Vec v = Vec::Zero(sb0.space().dim());
    for (unsigned h = 0; h < unsigned(sb0.space().n_spin()); ++h) {
        cplx c = theta_gram_det(par, 0, h);
        for (int a = 1; a <= par.N; ++a)
            if ((h >> (a - 1)) & 1)
                c *= std::exp(1i * double(par.y) * par.eta) * par.axy_fn(par.xi_shift(a, 0)) *
                     gauge_f(par, g, par.xi[std::size_t(a - 1)]) /
                     (par.kappa * par.d_fn(par.xi_shift(a, 1)));
        for (int s = 1; s <= g.M; ++s)
            c *= dstep_coeff(par, -g.M + s, h, roots[std::size_t(s - 1)]);
        v += c * sb0.right().col(h);
    }
    return v;
}

// Left eigenstate: mirrored chain from the sector at plus the degree.
inline Mat left_eigenstate_via_inhom(const SovBasis& sb0, const std::vector<cplx>& roots,
                                     const InhomGauge& g) {
    const ModelParams& par = sb0.space().params();
    if (sb0.r() != 0) fail("ConfigError", "expected the physical-sector basis");
    if (int(roots.size()) != g.M) fail("ConfigError", "root count differs from the degree");
    sb0.space().sector_indices(g.M);
    Mat v = Mat::Zero(1, sb0.space().dim());
    for (unsigned h = 0; h < unsigned(sb0.space().n_spin()); ++h) {
        cplx c = theta_gram_det(par, 0, h);
        for (int a = 1; a <= par.N; ++a)
            if ((h >> (a - 1)) & 1)
                c *= par.kappa * std::exp(1i * double(par.y) * par.eta) *
                     gauge_f(par, g, par.xi[std::size_t(a - 1)]);
        for (int s = 1; s <= g.M; ++s)
            c *= dstep_coeff(par, g.M - s, h, roots[std::size_t(s - 1)]);
        v += c * sb0.left().row(h);
    }
    return v;
}

} // namespace sov6v

#endif // SOV6V_TQINHOM_HPP
