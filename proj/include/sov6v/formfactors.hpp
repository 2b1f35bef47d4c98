#ifndef SOV6V_FORMFACTORS_HPP
#define SOV6V_FORMFACTORS_HPP

// Local operators (spin projectors/raising/lowering and height projectors),
// their reconstruction in terms of the quasi-periodic monodromy matrix and
// transfer-matrix propagators, and determinant representations for their
// matrix elements between transfer-matrix eigenstates.  Every determinant
// value can be cross-checked against the explicit dense oracle.

#include <string>
#include <thread>
#include <vector>

#include "sov6v/spectrum.hpp"

namespace sov6v {

// ---- local operators --------------------------------------------------------

// Elementary spin operators at site n; in the h-mask basis the "+" state is
// bit 0.  PP = |+><+|, MM = |-><-|, PM = |+><-|, MP = |-><+|.
enum class SpinKind { PP, MM, PM, MP };

inline void check_site(const ModelParams& par, int n) {
    if (n < 1 || n > par.N) fail("InvalidSite", "site index out of range");
}

inline Mat spin_op_full(const RepSpace& rs, int n, SpinKind kind) {
    check_site(rs.params(), n);
    const unsigned mask = 1u << (n - 1);
    Mat M = Mat::Zero(rs.dim(), rs.dim());
    for (unsigned h = 0; h < unsigned(rs.n_spin()); ++h) {
        const bool minus = (h & mask) != 0;
        for (int a = rs.a_min(); a <= rs.a_max(); ++a) {
            const int in = rs.index(h, a);
            switch (kind) {
                case SpinKind::PP:
                    if (!minus) M(in, in) = 1.0;
                    break;
                case SpinKind::MM:
                    if (minus) M(in, in) = 1.0;
                    break;
                case SpinKind::PM:
                    if (minus) M(rs.index(h ^ mask, a), in) = 1.0;
                    break;
                case SpinKind::MP:
                    if (!minus) M(rs.index(h ^ mask, a), in) = 1.0;
                    break;
            }
        }
    }
    return M;
}

// Height projector at site n onto the value s = t_0 + eta*k, as a diagonal on
// the full space.  Built from the recursion
//   P^{(n)}_k = P^{(n-1)}_{k-1} E_{n-1}^{++} + P^{(n-1)}_{k+1} E_{n-1}^{--},
// with the site-1 projector picking the dynamical index a = -k.  All factors
// are diagonal, so the recursion stays a diagonal vector.
inline Vec height_op_diag(const RepSpace& rs, int n, int k) {
    const ModelParams& par = rs.params();
    check_site(par, n);
    // indicator of height index k at site m, as a function of (h, a)
    auto base = [&](unsigned /*h*/, int a, int kk) { return a == -kk ? 1.0 : 0.0; };
    std::vector<double> diag(std::size_t(rs.dim()));
    for (unsigned h = 0; h < unsigned(rs.n_spin()); ++h)
        for (int a = rs.a_min(); a <= rs.a_max(); ++a) {
            // unroll the recursion: at site n the surviving branch picks
            // k - sum_{m<n} sigma_m^z at site 1, each step conditioned on h_m
            int kk = k;
            for (int m = n - 1; m >= 1; --m) kk -= 1 - 2 * int((h >> (m - 1)) & 1);
            diag[std::size_t(rs.index(h, a))] = base(h, a, kk);
        }
    Vec v(rs.dim());
    for (int i = 0; i < rs.dim(); ++i) v(i) = diag[std::size_t(i)];
    return v;
}

// ---- quasi-periodic monodromy on a grade block ------------------------------

// The twisted monodromy operator on aux (x) space preserves the grading
// g = (sector) + (1 if aux = "-").  Its grade-g block, in the ordered basis
// [aux + (x) sector g ; aux - (x) sector g-1], each of size 2^N:
inline Mat ymon_grade_block(const RepSpace& rs, cplx lam, int g) {
    const ModelParams& par = rs.params();
    const MonodromyBlocks m = rs.monodromy_cal(lam);
    const int ns = rs.n_spin();
    Mat M(2 * ns, 2 * ns);
    M.topLeftCorner(ns, ns) = par.kappa * rs.restrict_sector(m.C, g, g);
    M.topRightCorner(ns, ns) = par.kappa * rs.restrict_sector(m.D, g, g - 1);
    M.bottomLeftCorner(ns, ns) = rs.restrict_sector(m.A, g - 1, g) / par.kappa;
    M.bottomRightCorner(ns, ns) = rs.restrict_sector(m.B, g - 1, g - 1) / par.kappa;
    return M;
}

inline Mat guarded_inverse(const Mat& block, const char* what, double tol) {
    Eigen::JacobiSVD<Mat> svd(block);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin < 1e3 * tol * smax) fail("SingularPropagator", what);
    return block.partialPivLu().inverse();
}

// Transfer-matrix block on sector r and its inverse.
inline Mat transfer_block(const RepSpace& rs, cplx lam, int r) {
    return rs.restrict_sector(rs.transfer_full(lam), r, r);
}

// ---- quantum inverse problem -------------------------------------------------

// max |tr_0[inverse monodromy](xi_n) - inverse transfer(xi_n)| on sector r.
inline double lemma_trace_residual(const RepSpace& rs, int n, int r = 0) {
    const ModelParams& par = rs.params();
    check_site(par, n);
    const cplx xin = par.xi_shift(n, 0);
    const int ns = rs.n_spin();
    const Mat inv0 = guarded_inverse(ymon_grade_block(rs, xin, r), "monodromy grade block",
                                     par.tol);
    const Mat inv1 = guarded_inverse(ymon_grade_block(rs, xin, r + 1), "monodromy grade block",
                                     par.tol);
    const Mat trace = inv0.topLeftCorner(ns, ns) + inv1.bottomRightCorner(ns, ns);
    const Mat tinv = guarded_inverse(transfer_block(rs, xin, r), "transfer block", par.tol);
    return (trace - tinv).cwiseAbs().maxCoeff();
}

// Reconstruction of E_n^{ij} from monodromy entries and transfer propagators,
// measured against the elementary spin matrix on the r=0 sector.  Returns the
// max-norm residual over the applicable identities: the direct-entry form,
// the inverse-entry form, and (for the diagonal projectors) the shifted-point
// form divided by the quantum determinant.
inline double inverse_problem_check(const RepSpace& rs, int n, SpinKind kind) {
    const ModelParams& par = rs.params();
    check_site(par, n);
    const int ns = rs.n_spin();
    // sign conventions: aux/spin "+" is +1, "-" is -1
    int i = 0, j = 0; // +1 / -1
    switch (kind) {
        case SpinKind::PP: i = +1; j = +1; break;
        case SpinKind::MM: i = -1; j = -1; break;
        case SpinKind::PM: i = +1; j = -1; break;
        case SpinKind::MP: i = -1; j = +1; break;
    }
    const int s1 = i - j;              // sector after the dynamical shift
    const int dM = (i == +1 ? 0 : 1) - (j == +1 ? 0 : 1); // sector step of entry (j,i)
    const int s2 = s1 + dM;            // sector of the output
    // dynamical shift block T^{j-i}: sector 0 -> s1 (identity on the h index)
    // (a -> a + (j-i) keeps h fixed, so in mask ordering it is the identity)
    const Mat ref = rs.restrict_sector(spin_op_full(rs, n, kind), s2, 0);

    auto prop = [&](int r, int kmax) { // T(xi_1) ... T(xi_kmax) on sector r
        Mat P = Mat::Identity(ns, ns);
        for (int k = 1; k <= kmax; ++k) P = P * transfer_block(rs, par.xi_shift(k, 0), r);
        return P;
    };
    auto prop_inv = [&](int r, int kmax) { // T(xi_kmax)^{-1} ... T(xi_1)^{-1} on sector r
        Mat P = Mat::Identity(ns, ns);
        for (int k = kmax; k >= 1; --k)
            P = P * guarded_inverse(transfer_block(rs, par.xi_shift(k, 0), r),
                                    "transfer block", par.tol);
        return P;
    };
    const cplx xin = par.xi_shift(n, 0);
    const MonodromyBlocks m = rs.monodromy_cal(xin);
    // entry (row j, column i) of the twisted monodromy with the column shift
    auto entry_block = [&](const MonodromyBlocks& mb, int jj, int ii, int r_in) {
        if (jj == +1 && ii == +1) return Mat(par.kappa * rs.restrict_sector(mb.C, r_in, r_in));
        if (jj == -1 && ii == -1) return Mat(rs.restrict_sector(mb.B, r_in, r_in) / par.kappa);
        if (jj == -1 && ii == +1)
            return Mat(rs.restrict_sector(mb.A, r_in - 1, r_in) / par.kappa);
        return Mat(par.kappa * rs.restrict_sector(mb.D, r_in + 1, r_in));
    };

    double res = 0.0;
    // direct-entry reconstruction
    {
        const Mat R = prop(s2, n - 1) * entry_block(m, j, i, s1) * prop_inv(s1, n);
        res = std::max(res, (R - ref).cwiseAbs().maxCoeff());
    }
    // inverse-entry reconstruction: grade block g = s1 + (i=="-")
    {
        const int g = s1 + (i == -1 ? 1 : 0);
        const Mat inv = guarded_inverse(ymon_grade_block(rs, xin, g), "monodromy grade block",
                                        par.tol);
        Mat blk;
        if (j == +1 && i == +1) blk = inv.topLeftCorner(ns, ns);
        else if (j == -1 && i == -1) blk = inv.bottomRightCorner(ns, ns);
        else if (j == -1 && i == +1) blk = inv.bottomLeftCorner(ns, ns);
        else blk = inv.topRightCorner(ns, ns);
        const Mat R = prop(s2, n) * blk * prop_inv(s1, n - 1);
        res = std::max(res, (R - ref).cwiseAbs().maxCoeff());
    }
    // shifted-point form for the diagonal projectors
    if (kind == SpinKind::PP || kind == SpinKind::MM) {
        const cplx detq = par.a_fn(par.xi_shift(n, 0)) * par.d_fn(par.xi_shift(n, 1));
        const MonodromyBlocks ms = rs.monodromy_cal(par.xi_shift(n, 1));
        const Mat mid = kind == SpinKind::PP
                            ? Mat(rs.restrict_sector(ms.B, 0, 0) / par.kappa)
                            : Mat(par.kappa * rs.restrict_sector(ms.C, 0, 0));
        const Mat R = -prop(0, n) * mid * prop_inv(0, n - 1) / detq;
        res = std::max(res, (R - ref).cwiseAbs().maxCoeff());
    }
    return res;
}

// Height-projector reconstruction residual: propagated reference-site
// projector against the recursion oracle, on the r=0 sector.
inline double inverse_problem_height_check(const RepSpace& rs, int n, int k) {
    const ModelParams& par = rs.params();
    check_site(par, n);
    const int ns = rs.n_spin();
    Mat P = Mat::Identity(ns, ns), Pinv = Mat::Identity(ns, ns);
    for (int m = 1; m <= n - 1; ++m) {
        const Mat T = transfer_block(rs, par.xi_shift(m, 0), 0);
        P = P * T;
    }
    for (int m = n - 1; m >= 1; --m)
        Pinv = Pinv * guarded_inverse(transfer_block(rs, par.xi_shift(m, 0), 0),
                                      "transfer block", par.tol);
    // site-1 projector on sector 0: h-diagonal with popcount(h) == k
    Mat D0 = Mat::Zero(ns, ns);
    for (unsigned h = 0; h < unsigned(ns); ++h)
        if (__builtin_popcount(h) == k) D0(h, h) = 1.0;
    const Mat R = P * D0 * Pinv;
    Mat full = Mat::Zero(rs.dim(), rs.dim());
    full.diagonal() = height_op_diag(rs, n, k);
    const Mat ref = rs.restrict_sector(full, 0, 0);
    return (R - ref).cwiseAbs().maxCoeff();
}

// ---- determinant form factors -------------------------------------------------

// (N+1) x (N+1) bordered scalar-product matrix evaluated at `point`; the border
// column carries q^{(0)} of the left state times q^{(1)} of the right state.
inline Mat bordered_s_matrix(const ModelParams& par, const SeparateState& st,
                             const SeparateState& stp, cplx point) {
    const int N = par.N;
    Mat S(N + 1, N + 1);
    const cplx xb = xi_bar(par, 0);
    for (int a = 1; a <= N; ++a) {
        const cplx wgt = std::exp(1i * double(par.y) * par.eta) *
                         par.axy_fn(par.xi_shift(a, 0)) / par.d_fn(par.xi_shift(a, 1));
        for (int b = 1; b <= N; ++b)
            S(a - 1, b - 1) =
                st.q0[std::size_t(a - 1)] * stp.q0[std::size_t(a - 1)] *
                    vartheta_basis(b - 1, N, par.xi_shift(a, 0) - xb, par.theta) +
                wgt * st.q1[std::size_t(a - 1)] * stp.q1[std::size_t(a - 1)] *
                    vartheta_basis(b - 1, N, par.xi_shift(a, 1) - xb, par.theta);
        S(a - 1, N) = std::exp(1i * double(par.y) * par.xi[std::size_t(a - 1)]) *
                      par.axy_fn(par.xi_shift(a, 0)) * st.q0[std::size_t(a - 1)] *
                      stp.q1[std::size_t(a - 1)];
    }
    for (int b = 1; b <= N; ++b)
        S(N, b - 1) = -std::exp(-1i * double(par.y) * point) *
                      vartheta_basis(b - 1, N, point - xb, par.theta);
    S(N, N) = 0.0;
    return S;
}

inline void check_propagator(const ModelParams& par, const std::vector<cplx>& tv,
                             const std::vector<cplx>& tvp) {
    double scale = 0.0;
    for (const cplx& v : tv) scale = std::max(scale, std::abs(v));
    for (const cplx& v : tvp) scale = std::max(scale, std::abs(v));
    for (const cplx& v : tv)
        if (std::abs(v) < 1e3 * par.tol * scale)
            fail("ZeroEigenvalueAtInhomogeneity", "propagator prefactor too small");
    for (const cplx& v : tvp)
        if (std::abs(v) < 1e3 * par.tol * scale)
            fail("ZeroEigenvalueAtInhomogeneity", "propagator prefactor too small");
}

enum class SpinWhich { First, Second };

// Matrix element of the diagonal spin projector at site n between the left
// eigenstate of eigenvalue values tv and the right eigenstate of tvp, in the
// two equivalent bordered-determinant forms.
inline cplx ff_spin_det(const ModelParams& par, const std::vector<cplx>& tv,
                        const std::vector<cplx>& tvp, int n, SpinKind kind,
                        SpinWhich which) {
    check_site(par, n);
    if (kind != SpinKind::PP && kind != SpinKind::MM)
        fail("InvalidOperator", "determinant form exists for the diagonal projectors only");
    check_propagator(par, tv, tvp);
    const SeparateState st = q_table(par, tv);
    const SeparateState stp = q_table(par, tvp);
    if (which == SpinWhich::First) {
        cplx pref = 1.0;
        for (int b = 1; b <= n - 1; ++b) pref *= tv[std::size_t(b - 1)];
        for (int b = 1; b <= n; ++b) pref /= tvp[std::size_t(b - 1)];
        const Mat S = kind == SpinKind::PP
                          ? bordered_s_matrix(par, st, stp, par.xi_shift(n, 0))
                          : bordered_s_matrix(par, stp, st, par.xi_shift(n, 0));
        return pref * S.partialPivLu().determinant();
    }
    cplx pref = -1.0;
    for (int b = 1; b <= n; ++b) pref *= tv[std::size_t(b - 1)];
    for (int b = 1; b <= n - 1; ++b) pref /= tvp[std::size_t(b - 1)];
    const cplx detq = par.a_fn(par.xi_shift(n, 0)) * par.d_fn(par.xi_shift(n, 1));
    const Mat S = kind == SpinKind::PP
                      ? bordered_s_matrix(par, stp, st, par.xi_shift(n, 1))
                      : bordered_s_matrix(par, st, stp, par.xi_shift(n, 1));
    return pref * S.partialPivLu().determinant() / detq;
}

// Matrix element of the height projector onto t_0 + eta*k at site n, as a
// discrete Fourier sum of N+1 determinants.
inline cplx ff_height_det(const ModelParams& par, const std::vector<cplx>& tv,
                          const std::vector<cplx>& tvp, int n, int k) {
    check_site(par, n);
    if (k < 0 || k > par.N) fail("InvalidHeight", "height index outside 0..N");
    check_propagator(par, tv, tvp);
    const SeparateState st = q_table(par, tv);
    const SeparateState stp = q_table(par, tvp);
    const int N = par.N;
    const cplx xb = xi_bar(par, 0);
    cplx pref = 1.0;
    for (int b = 1; b <= n - 1; ++b) pref *= tv[std::size_t(b - 1)] / tvp[std::size_t(b - 1)];
    cplx sum = 0.0;
    for (int j = 0; j <= N; ++j) {
        const cplx phase = std::exp(2.0i * PI * double(j) / double(N + 1));
        Mat F(N, N);
        for (int a = 1; a <= N; ++a) {
            const cplx wgt = phase * std::exp(1i * double(par.y) * par.eta) *
                             par.axy_fn(par.xi_shift(a, 0)) / par.d_fn(par.xi_shift(a, 1));
            for (int b = 1; b <= N; ++b)
                F(a - 1, b - 1) =
                    st.q0[std::size_t(a - 1)] * stp.q0[std::size_t(a - 1)] *
                        vartheta_basis(b - 1, N, par.xi_shift(a, 0) - xb, par.theta) +
                    wgt * st.q1[std::size_t(a - 1)] * stp.q1[std::size_t(a - 1)] *
                        vartheta_basis(b - 1, N, par.xi_shift(a, 1) - xb, par.theta);
        }
        sum += std::exp(-2.0i * PI * double(j * k) / double(N + 1)) *
               F.partialPivLu().determinant();
    }
    return pref * sum / double(N + 1);
}

// ---- batch cross-check suite ---------------------------------------------------

struct FormFactorReport {
    std::string formula; // which determinant representation was used
    int bra = 0, ket = 0, site = 0, height = -1;
    cplx det_value{};
    cplx oracle{};
    double residual = 0.0;
    double cond = 0.0; // condition number of the determinant matrix (logged)
    bool pass = false;
};

inline double matrix_cond(const Mat& M) {
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    return s(0) / std::max(s(s.size() - 1), 1e-300);
}

// Every diagonal spin and height form factor at every eigenvalue pair and
// site, determinant value against the explicit-vector oracle.
inline std::vector<FormFactorReport> ff_crosscheck_suite(const RepSpace& rs,
                                                         double tol = 1e-7,
                                                         int threads = 1) {
    const ModelParams& par = rs.params();
    const BruteSpectrum bs = brute_spectrum(rs);
    const SovBasis sb(rs, 0);
    const int ns = rs.n_spin();
    // calibration constant of the dense SOV pairing against the determinant
    // normalization (the basis covectors are built up to a global Gram factor)
    const cplx ctilde = sb.gram()(0, 0) * theta_gram_det(par, 0, 0u);
    // explicit eigenvectors and operator matrices for the oracle
    std::vector<Mat> lefts;
    std::vector<Vec> rights;
    for (int kk = 0; kk < ns; ++kk) {
        const SeparateState st = q_table(par, bs.tvals[std::size_t(kk)]);
        lefts.push_back(sov_left_state(sb, st));
        rights.push_back(sov_right_state(sb, st));
    }
    std::vector<FormFactorReport> out;
    for (int kb = 0; kb < ns; ++kb)
        for (int kt = 0; kt < ns; ++kt)
            for (int n = 1; n <= par.N; ++n) {
                for (SpinKind kind : {SpinKind::PP, SpinKind::MM})
                    for (SpinWhich w : {SpinWhich::First, SpinWhich::Second}) {
                        FormFactorReport r;
                        r.formula = std::string(kind == SpinKind::PP ? "spin-pp" : "spin-mm") +
                                    (w == SpinWhich::First ? "-first" : "-second");
                        r.bra = kb;
                        r.ket = kt;
                        r.site = n;
                        out.push_back(r);
                    }
                for (int k = 0; k <= par.N; ++k) {
                    FormFactorReport r;
                    r.formula = "height";
                    r.bra = kb;
                    r.ket = kt;
                    r.site = n;
                    r.height = k;
                    out.push_back(r);
                }
            }
    // precompute oracle operator matrices once
    std::vector<Mat> spin_ops; // [site-1][0]=PP, [1]=MM flattened
    for (int n = 1; n <= par.N; ++n) {
        spin_ops.push_back(spin_op_full(rs, n, SpinKind::PP));
        spin_ops.push_back(spin_op_full(rs, n, SpinKind::MM));
    }
    std::vector<Vec> height_ops; // [(n-1)*(N+1)+k]
    for (int n = 1; n <= par.N; ++n)
        for (int k = 0; k <= par.N; ++k) height_ops.push_back(height_op_diag(rs, n, k));

    auto run = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            FormFactorReport& r = out[idx];
            const auto& tv = bs.tvals[std::size_t(r.bra)];
            const auto& tvp = bs.tvals[std::size_t(r.ket)];
            if (r.height >= 0) {
                r.det_value = ff_height_det(par, tv, tvp, r.site, r.height);
                const Vec diag = height_ops[std::size_t((r.site - 1) * (par.N + 1) + r.height)];
                r.oracle = (lefts[std::size_t(r.bra)] *
                            diag.asDiagonal() * rights[std::size_t(r.ket)])(0, 0) / ctilde;
                r.cond = 0.0;
            } else {
                const bool pp = r.formula.find("pp") != std::string::npos;
                const SpinKind kind = pp ? SpinKind::PP : SpinKind::MM;
                const SpinWhich w = r.formula.find("first") != std::string::npos
                                        ? SpinWhich::First
                                        : SpinWhich::Second;
                r.det_value = ff_spin_det(par, tv, tvp, r.site, kind, w);
                r.oracle = (lefts[std::size_t(r.bra)] *
                            spin_ops[std::size_t(2 * (r.site - 1) + (pp ? 0 : 1))] *
                            rights[std::size_t(r.ket)])(0, 0) / ctilde;
                const SeparateState st = q_table(par, tv), stp = q_table(par, tvp);
                r.cond = matrix_cond(bordered_s_matrix(par, st, stp, par.xi_shift(r.site, 0)));
            }
        }
    };
    const int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        run(0, out.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (out.size() + std::size_t(nthreads) - 1) / std::size_t(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            const std::size_t lo = std::min(out.size(), std::size_t(t) * chunk);
            const std::size_t hi = std::min(out.size(), lo + chunk);
            if (lo < hi) pool.emplace_back(run, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    double scale = 0.0;
    for (const auto& r : out) scale = std::max(scale, std::abs(r.oracle));
    for (auto& r : out) {
        const double denom =
            std::max({std::abs(r.oracle), std::abs(r.det_value), 0.01 * scale});
        r.residual = std::abs(r.det_value - r.oracle) / std::max(denom, 1e-300);
        r.pass = r.residual < tol;
    }
    return out;
}

} // namespace sov6v

#endif // SOV6V_FORMFACTORS_HPP
