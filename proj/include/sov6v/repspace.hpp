#ifndef SOV6V_REPSPACE_HPP
#define SOV6V_REPSPACE_HPP

// Dense construction of the dynamical R-matrix, the monodromy matrix with its
// dynamical shift operators, and the kappa-twisted antiperiodic transfer
// matrix, on a truncated dynamical-spin space.  This is the brute-force
// oracle layer: everything is an explicit complex matrix.
//
// Basis: |h> (x) |t(a)>, where h is an N-bit mask (h_1 = least significant
// bit, sigma^z_n eigenvalue 1-2h_n) and tau |t(a)> = (t_0 - eta a) |t(a)>.
// The shift operators act as T^+ |t(a)> = |t(a+1)>, T^- |t(a)> = |t(a-1)>,
// so T^+ lowers tau by eta and T^- raises it.  The S_tau = eta S + 2 tau
// grading value is 2 r eta + x pi + y pi omega with r = -a - popcount(h).

#include <Eigen/Dense>

#include "sov6v/model.hpp"

namespace sov6v {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// ---- local R-matrix --------------------------------------------------------

inline cplx weight_a(cplx lam, const ModelParams& par) {
    return theta1(lam + par.eta, par.theta);
}
inline cplx weight_b(cplx lam, cplx t, const ModelParams& par) {
    return theta1(lam, par.theta) * theta1(t + par.eta, par.theta) / theta1(t, par.theta);
}
inline cplx weight_c(cplx lam, cplx t, const ModelParams& par) {
    return theta1(par.eta, par.theta) * theta1(t + lam, par.theta) / theta1(t, par.theta);
}

// 4x4 R(lambda|t) on V1 (x) V2 in the basis (++, +-, -+, --).
inline Eigen::Matrix4cd r_matrix(cplx lam, cplx t, const ModelParams& par) {
    if (on_lattice(t, par.theta))
        fail("PoleAtHeight", "dynamical parameter on the lattice");
    const double y = par.y;
    Eigen::Matrix4cd R = Eigen::Matrix4cd::Zero();
    R(0, 0) = R(3, 3) = weight_a(lam, par);
    R(1, 1) = std::exp(1i * y * par.eta) * weight_b(lam, t, par);
    R(1, 2) = std::exp(1i * y * lam) * weight_c(lam, t, par);
    R(2, 1) = std::exp(-1i * y * lam) * weight_c(lam, -t, par);
    R(2, 2) = std::exp(-1i * y * par.eta) * weight_b(lam, -t, par);
    return R;
}

// Embed R_{pq}(lam | t + eta sigma_s^z) into the 8-dim space V1(x)V2(x)V3,
// for {p,q,s} a permutation of {1,2,3}; with_shift=false drops the sigma_s^z.
inline Eigen::MatrixXcd r_embed3(int p, int q, int s, cplx lam, cplx t, bool with_shift,
                                 const ModelParams& par) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(8, 8);
    auto bit = [](int state, int space) { return (state >> (3 - space)) & 1; }; // space 1 = leftmost
    Eigen::Matrix4cd Rp = r_matrix(lam, t + par.eta, par);
    Eigen::Matrix4cd Rm = r_matrix(lam, t - par.eta, par);
    Eigen::Matrix4cd R0 = with_shift ? Eigen::Matrix4cd::Zero() : r_matrix(lam, t, par);
    for (int in = 0; in < 8; ++in)
        for (int out = 0; out < 8; ++out) {
            if (bit(in, s) != bit(out, s)) continue;
            int rin = 2 * bit(in, p) + bit(in, q);
            int rout = 2 * bit(out, p) + bit(out, q);
            if (with_shift)
                M(out, in) = (bit(in, s) == 0 ? Rp : Rm)(rout, rin);
            else
                M(out, in) = R0(rout, rin);
        }
    return M;
}

// Max-norm residual of the dynamical Yang-Baxter equation at (l1,l2,l3,t).
inline double dybe_residual(cplx l1, cplx l2, cplx l3, cplx t, const ModelParams& par) {
    Eigen::MatrixXcd L = r_embed3(1, 2, 3, l1 - l2, t, true, par) *
                         r_embed3(1, 3, 2, l1 - l3, t, false, par) *
                         r_embed3(2, 3, 1, l2 - l3, t, true, par);
    Eigen::MatrixXcd R = r_embed3(2, 3, 1, l2 - l3, t, false, par) *
                         r_embed3(1, 3, 2, l1 - l3, t, true, par) *
                         r_embed3(1, 2, 3, l1 - l2, t, false, par);
    return (L - R).cwiseAbs().maxCoeff();
}

// Residual of the y=1 diagonal dynamical gauge identity:
// R_{y=1}(l12|t) = G2(l2|t) G1(l1|t+eta s2^z) R_{y=0}(l12|t) G2(l2|t+eta s1^z)^-1 G1(l1|t)^-1
inline double gauge_y1_residual(cplx l1, cplx l2, cplx t, const ModelParams& par) {
    if (par.y != 1) fail("InvalidModel", "gauge check requires y=1");
    ModelParams p0 = par;
    p0.y = 0;
    auto g = [&](cplx lam, cplx tv, int b) {
        return std::exp(-0.5i * tv) * std::exp((b == 0 ? 0.5i : -0.5i) * lam);
    };
    auto diagG = [&](int space, cplx lam, cplx tv, int shift_space) {
        Eigen::Matrix4cd D = Eigen::Matrix4cd::Zero();
        for (int st = 0; st < 4; ++st) {
            int b1 = (st >> 1) & 1, b2 = st & 1;
            int bs = space == 1 ? b1 : b2;
            cplx tloc = tv;
            if (shift_space == 1) tloc += par.eta * double(1 - 2 * b1);
            if (shift_space == 2) tloc += par.eta * double(1 - 2 * b2);
            D(st, st) = g(lam, tloc, bs);
        }
        return D;
    };
    Eigen::Matrix4cd lhs = r_matrix(l1 - l2, t, par);
    Eigen::Matrix4cd rhs = diagG(2, l2, t, 0) * diagG(1, l1, t, 2) *
                           r_matrix(l1 - l2, t, p0) *
                           diagG(2, l2, t, 1).inverse() * diagG(1, l1, t, 0).inverse();
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

// ---- truncated representation space ---------------------------------------

// Auxiliary-space blocks of a monodromy matrix: operators on the big space.
struct MonodromyBlocks {
    Mat A, B, C, D;
};

class RepSpace {
public:
    explicit RepSpace(ModelParams par) : par_(std::move(par)) {
        par_.validate();
        // window r in [-(N+2), N+2]  =>  a = -(r + popcount h) in [-2N-2, N+2]
        a_min_ = -2 * par_.N - 2;
        a_max_ = par_.N + 2;
    }

    const ModelParams& params() const { return par_; }
    int a_min() const { return a_min_; }
    int a_max() const { return a_max_; }
    int n_spin() const { return 1 << par_.N; }
    int n_dyn() const { return a_max_ - a_min_ + 1; }
    int dim() const { return n_spin() * n_dyn(); }
    int index(unsigned h, int a) const { return int(h) * n_dyn() + (a - a_min_); }

    // diagonal operators
    Vec tau_diag() const {
        Vec v(dim());
        for (unsigned h = 0; h < unsigned(n_spin()); ++h)
            for (int a = a_min_; a <= a_max_; ++a)
                v(index(h, a)) = par_.t_of_a(a);
        return v;
    }
    Vec S_diag() const {
        Vec v(dim());
        for (unsigned h = 0; h < unsigned(n_spin()); ++h)
            for (int a = a_min_; a <= a_max_; ++a)
                v(index(h, a)) = double(par_.s_of(h));
        return v;
    }

    // T^{+-}: a -> a +- 1 (entries leaving the window are dropped)
    Mat T_shift(int dir) const {
        Mat M = Mat::Zero(dim(), dim());
        for (unsigned h = 0; h < unsigned(n_spin()); ++h)
            for (int a = a_min_; a <= a_max_; ++a) {
                int a2 = a + dir;
                if (a2 < a_min_ || a2 > a_max_) continue;
                M(index(h, a2), index(h, a)) = 1.0;
            }
        return M;
    }

    // Static monodromy blocks A(lam|tau), B(lam|tau), C(lam|tau), D(lam|tau):
    // ordered product R_{0N}(lam-xi_N | tau + eta sum_{m<N} sigma_m^z) ... R_{01}(lam-xi_1|tau).
    MonodromyBlocks monodromy_static(cplx lam) const {
        const int d = dim();
        // M[i][j], auxiliary indices i,j in {0 (=+), 1 (=-)}
        Mat M[2][2] = {{Mat::Identity(d, d), Mat::Zero(d, d)},
                       {Mat::Zero(d, d), Mat::Identity(d, d)}};
        for (int n = 1; n <= par_.N; ++n) {
            // The R_{0n} factor has at most one nonzero per (aux block, input
            // state) so we apply it as a row-gather instead of a dense GEMM.
            Mat M2[2][2] = {{Mat::Zero(d, d), Mat::Zero(d, d)},
                            {Mat::Zero(d, d), Mat::Zero(d, d)}};
            const cplx lr = lam - par_.xi[std::size_t(n - 1)];
            for (unsigned h = 0; h < unsigned(n_spin()); ++h)
                for (int a = a_min_; a <= a_max_; ++a) {
                    // dynamical argument: tau + eta sum_{m<n} sigma_m^z
                    int s_below = 0;
                    for (int m = 1; m < n; ++m) s_below += 1 - 2 * ((h >> (m - 1)) & 1);
                    const cplx t = par_.t_of_a(a) + par_.eta * double(s_below);
                    if (on_lattice(t, par_.theta))
                        fail("PoleAtHeight", "height hits the lattice inside the window");
                    const int hn = (h >> (n - 1)) & 1;
                    const int in = index(h, a);
                    const int flip = index(h ^ (1u << (n - 1)), a);
                    // entries (aux_out, aux_in, out_row, coeff) of R_{0n}
                    struct E { int i, j, row; cplx w; } ent[3];
                    int ne = 0;
                    if (hn == 0) {
                        ent[ne++] = {0, 0, in, weight_a(lr, par_)};
                        ent[ne++] = {1, 1, in, std::exp(-1i * double(par_.y) * par_.eta) *
                                                   weight_b(lr, -t, par_)};
                        ent[ne++] = {0, 1, flip, std::exp(1i * double(par_.y) * lr) *
                                                     weight_c(lr, t, par_)};
                    } else {
                        ent[ne++] = {0, 0, in, std::exp(1i * double(par_.y) * par_.eta) *
                                                   weight_b(lr, t, par_)};
                        ent[ne++] = {1, 1, in, weight_a(lr, par_)};
                        ent[ne++] = {1, 0, flip, std::exp(-1i * double(par_.y) * lr) *
                                                     weight_c(lr, -t, par_)};
                    }
                    for (int e = 0; e < ne; ++e)
                        for (int k = 0; k < 2; ++k)
                            M2[ent[e].i][k].row(ent[e].row) += ent[e].w * M[ent[e].j][k].row(in);
                }
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 2; ++k) M[i][k] = std::move(M2[i][k]);
        }
        return {M[0][0], M[0][1], M[1][0], M[1][1]};
    }

    // Calligraphic blocks: M(lam|tau) T^{sigma_0^z}, i.e. A T^+, B T^-, C T^+, D T^-.
    MonodromyBlocks monodromy_cal(cplx lam) const {
        MonodromyBlocks s = monodromy_static(lam);
        Mat Tp = T_shift(+1), Tm = T_shift(-1);
        return {s.A * Tp, s.B * Tm, s.C * Tp, s.D * Tm};
    }

    // kappa-twisted antiperiodic transfer matrix on the full truncated space.
    Mat transfer_full(cplx lam) const {
        MonodromyBlocks m = monodromy_cal(lam);
        return m.B / par_.kappa + par_.kappa * m.C;
    }

    // ---- sector bookkeeping (S_tau eigenvalue 2 r eta + x pi + y pi omega) ----

    std::vector<int> sector_indices(int r) const {
        std::vector<int> idx;
        for (unsigned h = 0; h < unsigned(n_spin()); ++h) {
            int a = -r - __builtin_popcount(h);
            if (a < a_min_ || a > a_max_) fail("WindowOverflow", "sector outside window");
            idx.push_back(index(h, a));
        }
        return idx;
    }

    Mat restrict_sector(const Mat& op, int r_out, int r_in) const {
        auto rows = sector_indices(r_out);
        auto cols = sector_indices(r_in);
        Mat M(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j)
                M(Eigen::Index(i), Eigen::Index(j)) = op(rows[i], cols[j]);
        return M;
    }

    // Transfer matrix restricted to the r-sector (2^N x 2^N, h-mask ordering).
    Mat transfer_sector(cplx lam, int r = 0) const {
        return restrict_sector(transfer_full(lam), r, r);
    }

    // Columns (input states) whose dynamical index sits at least `pad` shifts
    // inside the window; residuals of algebra identities are measured there.
    double residual_interior(const Mat& M, int pad = 2) const {
        double mx = 0.0;
        for (unsigned h = 0; h < unsigned(n_spin()); ++h)
            for (int a = a_min_ + pad; a <= a_max_ - pad; ++a) {
                int j = index(h, a);
                for (int i = 0; i < dim(); ++i)
                    mx = std::max(mx, std::abs(M(i, j)));
            }
        return mx;
    }

    // e^{-i y eta S} theta(tau)/theta(tau + eta S) as a diagonal operator.
    Vec inv_weight_diag() const {
        Vec v(dim());
        for (unsigned h = 0; h < unsigned(n_spin()); ++h) {
            double s = par_.s_of(h);
            for (int a = a_min_; a <= a_max_; ++a) {
                cplx t = par_.t_of_a(a);
                v(index(h, a)) = std::exp(-1i * double(par_.y) * par_.eta * s) *
                                 theta1(t, par_.theta) / theta1(t + par_.eta * s, par_.theta);
            }
        }
        return v;
    }

private:
    ModelParams par_;
    int a_min_, a_max_;
};

} // namespace sov6v

#endif // SOV6V_REPSPACE_HPP
