#ifndef SOV6V_SPECTRUM_HPP
#define SOV6V_SPECTRUM_HPP

// Spectrum of the kappa-twisted antiperiodic transfer matrix: brute-force
// eigen-decomposition on the physical sector, the discrete quadratic system
// satisfied by the eigenvalue functions, an independent multistart Newton
// solver for that system, the separate-state eigenvectors and the scalar
// product in determinant form.

#include <Eigen/Eigenvalues>

#include "sov6v/sovbasis.hpp"

namespace sov6v {

// Interpolation of an eigenvalue function from its values at the
// inhomogeneities:
//   t(lam) = sum_a e^{i y (xi_a - lam)} theta(t_{0,0} - lam + xi_a)/theta(t_{0,0})
//            prod_{b!=a} theta(lam - xi_b)/theta(xi_a - xi_b) * t(xi_a)
inline cplx t_interp_coeff(const ModelParams& par, int a, cplx lam) {
    const cplx t00 = par.t_rh(0, 0u);
    const cplx xa = par.xi[std::size_t(a - 1)];
    cplx v = std::exp(1i * double(par.y) * (xa - lam)) *
             theta1(t00 - lam + xa, par.theta) / theta1(t00, par.theta);
    for (int b = 1; b <= par.N; ++b) {
        if (b == a) continue;
        const cplx xb = par.xi[std::size_t(b - 1)];
        v *= theta1(lam - xb, par.theta) / theta1(xa - xb, par.theta);
    }
    return v;
}

inline cplx t_interp(const ModelParams& par, const std::vector<cplx>& vals, cplx lam) {
    cplx s = 0.0;
    for (int a = 1; a <= par.N; ++a) s += t_interp_coeff(par, a, lam) * vals[std::size_t(a - 1)];
    return s;
}

// Relative residual of the discrete quadratic system
//   t(xi_a) t(xi_a - eta) = (-1)^{x+y+xy} a(xi_a) d(xi_a - eta)
inline double discrete_residual(const ModelParams& par, const std::vector<cplx>& vals) {
    double mx = 0.0;
    for (int a = 1; a <= par.N; ++a) {
        const cplx rhs = par.sign_xy() * par.a_fn(par.xi_shift(a, 0)) *
                         par.d_fn(par.xi_shift(a, 1));
        const cplx lhs = vals[std::size_t(a - 1)] * t_interp(par, vals, par.xi_shift(a, 1));
        mx = std::max(mx, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return mx;
}

// ---- brute-force spectrum ---------------------------------------------------

struct BruteSpectrum {
    std::vector<cplx> eig;                 // eigenvalues of T(xi_1) on the sector
    Mat V;                                 // right eigenvectors (columns)
    Mat Vinv;                              // left eigenvectors (rows)
    std::vector<std::vector<cplx>> tvals;  // per eigenvector, values t(xi_a)
};

inline BruteSpectrum brute_spectrum(const RepSpace& rs) {
    const ModelParams& par = rs.params();
    BruteSpectrum out;
    const Mat T1 = rs.transfer_sector(par.xi_shift(1, 0), 0);
    Eigen::ComplexEigenSolver<Mat> es(T1);
    if (es.info() != Eigen::Success) fail("DegenerateSpectrum", "eigensolver failed");
    out.V = es.eigenvectors();
    out.Vinv = out.V.inverse();
    const int ns = rs.n_spin();
    double scale = 0.0;
    for (int k = 0; k < ns; ++k) {
        out.eig.push_back(es.eigenvalues()(k));
        scale = std::max(scale, std::abs(out.eig.back()));
    }
    for (int i = 0; i < ns; ++i)
        for (int j = i + 1; j < ns; ++j)
            if (std::abs(out.eig[std::size_t(i)] - out.eig[std::size_t(j)]) <
                1e3 * par.tol * std::max(1.0, scale))
                fail("DegenerateSpectrum", "eigenvalue gap below the genericity band");
    // shared eigenvectors across lambda: Rayleigh quotients of the commuting
    // transfer matrices at the other inhomogeneities
    out.tvals.assign(std::size_t(ns), std::vector<cplx>(std::size_t(par.N)));
    for (int a = 1; a <= par.N; ++a) {
        const Mat P = out.Vinv * rs.transfer_sector(par.xi_shift(a, 0), 0) * out.V;
        for (int k = 0; k < ns; ++k) out.tvals[std::size_t(k)][std::size_t(a - 1)] = P(k, k);
    }
    return out;
}

// ---- independent Newton solver for the discrete system ---------------------

// The system reads u_a (L u)_a = w_a with L the interpolation matrix to the
// shifted points and w the twisted quantum-determinant values.
struct DiscreteSystem {
    Mat L;
    Vec w;
};

inline DiscreteSystem discrete_system(const ModelParams& par) {
    DiscreteSystem ds;
    ds.L = Mat(par.N, par.N);
    ds.w = Vec(par.N);
    for (int a = 1; a <= par.N; ++a) {
        for (int c = 1; c <= par.N; ++c)
            ds.L(a - 1, c - 1) = t_interp_coeff(par, c, par.xi_shift(a, 1));
        ds.w(a - 1) = par.sign_xy() * par.a_fn(par.xi_shift(a, 0)) * par.d_fn(par.xi_shift(a, 1));
    }
    return ds;
}

inline std::vector<std::vector<cplx>> solve_discrete_system(const ModelParams& par,
                                                            bool exhaustive = true,
                                                            int budget_per_solution = 400,
                                                            std::uint64_t seed = 8113) {
    const DiscreteSystem ds = discrete_system(par);
    const int N = par.N;
    const int want = 1 << N;
    const double wscale = ds.w.cwiseAbs().maxCoeff();
    const double lscale = ds.L.cwiseAbs().maxCoeff();
    const double radius = 2.0 * std::sqrt(wscale / std::max(lscale, 1e-300));
    auto F = [&](const Vec& u) -> Vec { return u.cwiseProduct(ds.L * u) - ds.w; };
    std::vector<std::vector<cplx>> found;
    Rng rng(seed);
    const int budget = budget_per_solution * want;
    for (int trial = 0; trial < budget && int(found.size()) < want; ++trial) {
        Vec u(N);
        for (int a = 0; a < N; ++a) u(a) = radius * rng.box(-1.0, 1.0, -1.0, 1.0);
        bool ok = false;
        Vec r = F(u);
        for (int it = 0; it < 80; ++it) {
            if (r.cwiseAbs().maxCoeff() < 1e-12 * wscale) { ok = true; break; }
            Mat J = Mat((ds.L * u).asDiagonal()) + Mat(u.asDiagonal()) * ds.L;
            Vec du = J.partialPivLu().solve(-r);
            double step = 1.0;
            bool moved = false;
            for (int halve = 0; halve < 25; ++halve) {
                Vec un = u + step * du;
                Vec rn = F(un);
                if (rn.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff()) {
                    u = un;
                    r = rn;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (!ok) continue;
        // polish once more and deduplicate at the matching threshold
        bool dup = false;
        for (const auto& v : found) {
            double dist = 0.0, sc = 1.0;
            for (int a = 0; a < N; ++a) {
                dist = std::max(dist, std::abs(u(a) - v[std::size_t(a)]));
                sc = std::max(sc, std::abs(v[std::size_t(a)]));
            }
            if (dist < 1e4 * par.tol * sc) { dup = true; break; }
        }
        if (dup) continue;
        std::vector<cplx> sol;
        for (int a = 0; a < N; ++a) sol.push_back(u(a));
        found.push_back(std::move(sol));
    }
    if (exhaustive && int(found.size()) < want)
        fail("IncompleteEnumeration", "found " + std::to_string(found.size()) + " of " +
                                          std::to_string(want) + " solutions");
    return found;
}

// ---- separate states --------------------------------------------------------

// q-coefficient table of a separate state: the ratio q^{(1)}/q^{(0)} equals
// t(xi_a)/a_{x,y}(xi_a) = d(xi_a - eta)/t(xi_a - eta); normalized per site by
// the larger of the two values.
struct SeparateState {
    std::vector<cplx> q0, q1;
};

inline SeparateState q_table(const ModelParams& par, const std::vector<cplx>& tvals) {
    SeparateState st;
    for (int a = 1; a <= par.N; ++a) {
        const cplx ta = tvals[std::size_t(a - 1)];
        const cplx axy = par.axy_fn(par.xi_shift(a, 0));
        if (std::abs(ta) < 1e-14 && std::abs(axy) < 1e-14)
            fail("ZeroQPair", "both q-branch denominators vanish at site " + std::to_string(a));
        if (std::abs(ta) <= std::abs(axy)) {
            st.q0.push_back(1.0);
            st.q1.push_back(ta / axy);
        } else {
            st.q0.push_back(axy / ta);
            st.q1.push_back(1.0);
        }
    }
    return st;
}

// Right separate state  sum_h prod_a [(kappa^{-1} e^{i y eta} a_{x,y}(xi_a)/
// d(xi_a-eta))^{h_a} q_a^{(h_a)}] det Theta^{(0,h)} |h,0>  in the full space.
inline Vec sov_right_state(const SovBasis& sb, const SeparateState& st) {
    const ModelParams& par = sb.space().params();
    Vec v = Vec::Zero(sb.space().dim());
    for (unsigned h = 0; h < unsigned(sb.space().n_spin()); ++h) {
        cplx c = theta_gram_det(par, 0, h);
        for (int a = 1; a <= par.N; ++a) {
            const int ha = (h >> (a - 1)) & 1;
            if (ha == 1)
                c *= std::exp(1i * double(par.y) * par.eta) * par.axy_fn(par.xi_shift(a, 0)) /
                     (par.kappa * par.d_fn(par.xi_shift(a, 1))) * st.q1[std::size_t(a - 1)];
            else
                c *= st.q0[std::size_t(a - 1)];
        }
        v += c * sb.right().col(h);
    }
    return v;
}

// Left separate state  sum_h prod_a [(kappa e^{i y eta})^{h_a} q_a^{(h_a)}]
// det Theta^{(0,h)} <0,h|  as a row vector in the full space.
inline Mat sov_left_state(const SovBasis& sb, const SeparateState& st) {
    const ModelParams& par = sb.space().params();
    Mat v = Mat::Zero(1, sb.space().dim());
    for (unsigned h = 0; h < unsigned(sb.space().n_spin()); ++h) {
        cplx c = theta_gram_det(par, 0, h);
        for (int a = 1; a <= par.N; ++a) {
            const int ha = (h >> (a - 1)) & 1;
            if (ha == 1)
                c *= par.kappa * std::exp(1i * double(par.y) * par.eta) *
                     st.q1[std::size_t(a - 1)];
            else
                c *= st.q0[std::size_t(a - 1)];
        }
        v += c * sb.left().row(h);
    }
    return v;
}

// Scalar product of two separate states in determinant form:
//   det_N [F],  F_ab = sum_{h=0,1} (e^{i y eta} a_{x,y}(xi_a)/d(xi_a-eta))^h
//                      q_{t,a}^{(h)} q_{t',a}^{(h)} vartheta_{b-1}(xi_a^{(h)} - xibar_0)
inline cplx scalar_product_det(const ModelParams& par, const SeparateState& st,
                               const SeparateState& stp) {
    Mat F(par.N, par.N);
    const cplx xb = xi_bar(par, 0);
    for (int a = 1; a <= par.N; ++a) {
        const cplx wgt = std::exp(1i * double(par.y) * par.eta) *
                         par.axy_fn(par.xi_shift(a, 0)) / par.d_fn(par.xi_shift(a, 1));
        for (int b = 1; b <= par.N; ++b)
            F(a - 1, b - 1) =
                st.q0[std::size_t(a - 1)] * stp.q0[std::size_t(a - 1)] *
                    vartheta_basis(b - 1, par.N, par.xi_shift(a, 0) - xb, par.theta) +
                wgt * st.q1[std::size_t(a - 1)] * stp.q1[std::size_t(a - 1)] *
                    vartheta_basis(b - 1, par.N, par.xi_shift(a, 1) - xb, par.theta);
    }
    return F.partialPivLu().determinant();
}

} // namespace sov6v

#endif // SOV6V_SPECTRUM_HPP
