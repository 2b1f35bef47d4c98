#ifndef SOV6V_SOVBASIS_HPP
#define SOV6V_SOVBASIS_HPP

// Left and right separation-of-variables bases: states built from the spin-up
// / spin-down reference states by repeated action of the shifted-monodromy
// entry C at the (shifted) inhomogeneities, plus the closed-form coefficients
// of the operator actions on them and the theta-determinant scalar products.

#include <Eigen/SVD>

#include "sov6v/repspace.hpp"

namespace sov6v {

// Average point entering the theta-basis Gram matrix.
inline cplx xi_bar(const ModelParams& par, int r) {
    cplx s = par.t_rh(r, 0u);
    for (auto z : par.xi) s += z;
    return s / double(par.N);
}

// N x N matrix [Theta^{(r,h)}]_{ij} = vartheta_{j-1}(xi_i^{(h_i)} - xi_bar_r).
inline Mat theta_gram(const ModelParams& par, int r, unsigned h) {
    Mat M(par.N, par.N);
    const cplx xb = xi_bar(par, r);
    for (int i = 1; i <= par.N; ++i)
        for (int j = 0; j < par.N; ++j)
            M(i - 1, j) = vartheta_basis(j, par.N, par.xi_shift(i, (h >> (i - 1)) & 1) - xb,
                                         par.theta);
    return M;
}

inline cplx theta_gram_det(const ModelParams& par, int r, unsigned h) {
    std::vector<cplx> x;
    const cplx xb = xi_bar(par, r);
    for (int i = 1; i <= par.N; ++i) x.push_back(par.xi_shift(i, (h >> (i - 1)) & 1) - xb);
    return vartheta_det(x, par.theta);
}

// Shift coefficient of the D action between neighbouring sectors:
//   d_{r,h}(lam) = e^{-i y eta (s_h - s_1)/2} theta(t_{r,h})/theta(t_{r,1})
//                  prod_n theta(lam - xi_n^{(h_n)})
inline cplx d_shift_coeff(const ModelParams& par, int r, unsigned h, cplx lam) {
    const unsigned full = (1u << par.N) - 1;
    const double half_gap = 0.5 * double(par.s_of(h) - par.s_of(full));
    cplx v = std::exp(-1i * double(par.y) * par.eta * half_gap) *
             theta1(par.t_rh(r, h), par.theta) / theta1(par.t_rh(r, full), par.theta);
    for (int n = 1; n <= par.N; ++n)
        v *= theta1(lam - par.xi_shift(n, (h >> (n - 1)) & 1), par.theta);
    return v;
}

// Common interpolation prefactor of the B and C sums:
//   e^{i y (xi_a^{(h_a)} - lam)} theta(tref - lam + xi_a^{(h_a)})/theta(tref)
//   prod_{b != a} theta(lam - xi_b^{(h_b)})/theta(xi_a^{(h_a)} - xi_b^{(h_b)})
inline cplx bc_prefactor(const ModelParams& par, cplx tref, unsigned h, int a, cplx lam) {
    const cplx xa = par.xi_shift(a, (h >> (a - 1)) & 1);
    cplx v = std::exp(1i * double(par.y) * (xa - lam)) *
             theta1(tref - lam + xa, par.theta) / theta1(tref, par.theta);
    for (int b = 1; b <= par.N; ++b) {
        if (b == a) continue;
        const cplx xb = par.xi_shift(b, (h >> (b - 1)) & 1);
        v *= theta1(lam - xb, par.theta) / theta1(xa - xb, par.theta);
    }
    return v;
}

// Twisted amplitude entering the B action:
//   a^{(pm)}_{x,y,r,h}(lam) = (-1)^{x+y+xy} e^{2 i y r eta}
//                             theta(t_{r,h} pm eta)/theta(t_{-r,h} pm eta) a(lam)
inline cplx a_pm_coeff(const ModelParams& par, int r, unsigned h, int pm, cplx lam) {
    return par.sign_xy() * std::exp(2.0i * double(par.y) * double(r) * par.eta) *
           theta1(par.t_rh(r, h) + double(pm) * par.eta, par.theta) /
           theta1(par.t_rh(-r, h) + double(pm) * par.eta, par.theta) * par.a_fn(lam);
}

// Both SOV bases of the sector with grading value 2 r eta + x pi + y pi omega,
// stored densely in the canonical dynamical-spin basis (normalization 1 on the
// reference states).
class SovBasis {
public:
    SovBasis(const RepSpace& rs, int r, double rank_tol = 1e-6) : rs_(&rs), r_(r) {
        rs.sector_indices(r); // throws WindowOverflow when the sector is out of range
        const ModelParams& par = rs.params();
        const int d = rs.dim();
        const int ns = rs.n_spin();
        left_ = Mat::Zero(ns, d);
        right_ = Mat::Zero(d, ns);
        // C at the inhomogeneities (left chain) and at their shifts (right chain)
        std::vector<Mat> c_left, c_right;
        for (int n = 1; n <= par.N; ++n) {
            c_left.push_back(rs.monodromy_cal(par.xi_shift(n, 0)).C / par.d_fn(par.xi_shift(n, 1)));
            c_right.push_back(rs.monodromy_cal(par.xi_shift(n, 1)).C / par.d_fn(par.xi_shift(n, 1)));
        }
        // left states: start from <r,0| and flip spins up->down one at a time
        left_.row(0)(rs.index(0u, -r)) = 1.0;
        for (unsigned h = 1; h < unsigned(ns); ++h) {
            const int n = __builtin_ctz(h);
            left_.row(h) = left_.row(h ^ (1u << n)) * c_left[std::size_t(n)];
        }
        // right states: start from |1,r> and flip spins down->up one at a time
        const unsigned full = unsigned(ns) - 1;
        right_.col(full)(rs.index(full, -r - par.N)) = 1.0;
        for (unsigned hc = 1; hc < unsigned(ns); ++hc) {
            const unsigned h = full ^ hc;  // hc = complement mask already flipped up
            const int n = __builtin_ctz(hc);
            right_.col(h) = c_right[std::size_t(n)] * right_.col(h | (1u << n));
        }
        check_rank(rank_tol);
    }

    const RepSpace& space() const { return *rs_; }
    int r() const { return r_; }
    const Mat& left() const { return left_; }    // row h = <r,h|
    const Mat& right() const { return right_; }  // col h = |h,r>

    Mat gram() const { return left_ * right_; }

    // Projector on the sector, for the identity-resolution check.
    Mat sector_projector() const {
        Mat P = Mat::Zero(rs_->dim(), rs_->dim());
        for (int i : rs_->sector_indices(r_)) P(i, i) = 1.0;
        return P;
    }

    Mat resolution_of_identity() const {
        const Mat G = gram();
        Mat P = Mat::Zero(rs_->dim(), rs_->dim());
        for (unsigned h = 0; h < unsigned(rs_->n_spin()); ++h)
            P += (right_.col(h) * left_.row(h)) / G(h, h);
        return P;
    }

private:
    void check_rank(double rank_tol) const {
        const auto idx = rs_->sector_indices(r_);
        const int ns = rs_->n_spin();
        for (int side = 0; side < 2; ++side) {
            Mat M(ns, ns);
            for (unsigned h = 0; h < unsigned(ns); ++h)
                for (int k = 0; k < ns; ++k)
                    M(h, k) = side == 0 ? left_(h, idx[std::size_t(k)])
                                        : right_(idx[std::size_t(k)], h);
            Eigen::JacobiSVD<Mat> svd(M);
            const auto& s = svd.singularValues();
            if (s(s.size() - 1) < rank_tol * s(0))
                fail("RankDeficient", "SOV stack numerically rank-deficient (side " +
                                          std::string(side == 0 ? "left" : "right") + ")");
        }
    }

    const RepSpace* rs_;
    int r_;
    Mat left_, right_;
};

} // namespace sov6v

#endif // SOV6V_SOVBASIS_HPP
