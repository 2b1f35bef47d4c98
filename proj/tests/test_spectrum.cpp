// Tests of the transfer-matrix spectrum layer: brute-force diagonalization,
// the discrete quadratic system, the independent Newton enumeration, the
// separate-state eigenvectors and the determinant scalar products.

#include <catch2/catch_amalgamated.hpp>

#include "sov6v/spectrum.hpp"

using namespace sov6v;

namespace {
double max_abs(const Mat& M) { return M.cwiseAbs().maxCoeff(); }

// nearest-neighbour matching of two solution lists in max-norm
int match_index(const std::vector<std::vector<cplx>>& list, const std::vector<cplx>& v) {
    int best = -1;
    double bd = 1e300;
    for (std::size_t k = 0; k < list.size(); ++k) {
        double d = 0.0;
        for (std::size_t a = 0; a < v.size(); ++a)
            d = std::max(d, std::abs(list[k][a] - v[a]));
        if (d < bd) { bd = d; best = int(k); }
    }
    return best;
}
} // namespace

TEST_CASE("closed-form spectrum for a single site") {
    for (auto [x, y] : {std::pair{0, 1}, std::pair{0, 0}}) {
        ModelParams par = make_params(1, x, y, 211 + x + 2 * y);
        RepSpace rs(par);
        BruteSpectrum bs = brute_spectrum(rs);
        REQUIRE(bs.eig.size() == 2);
        const cplx t00 = par.t_rh(0, 0u);
        const cplx sq = -par.sign_xy() * theta1(par.eta, par.theta) * theta1(par.eta, par.theta) *
                        std::exp(-1i * double(par.y) * par.eta) * theta1(t00, par.theta) /
                        theta1(t00 + par.eta, par.theta);
        for (auto t1 : bs.eig)
            CHECK(std::abs(t1 * t1 - sq) < 1e-10 * std::abs(sq));
        CHECK(std::abs(bs.eig[0] + bs.eig[1]) < 1e-10 * std::abs(bs.eig[0]));
    }
}

TEST_CASE("brute spectrum: simplicity, discrete system and quasi-periodicity") {
    for (int N : {2, 3, 4}) {
        ModelParams par = make_params(N, 1, 1, 223 + N);
        RepSpace rs(par);
        BruteSpectrum bs = brute_spectrum(rs);
        CHECK(int(bs.eig.size()) == (1 << N));
        cplx xsum = 0.0;
        for (auto z : par.xi) xsum += z;
        const cplx pw_base = xsum - 0.5 * double(N) * par.eta + 0.5 * double(par.x) * PI;
        Rng rng(300 + N);
        for (const auto& tv : bs.tvals) {
            CHECK(discrete_residual(par, tv) < 1e-9);
            // the two q-ratio expressions coincide
            for (int a = 1; a <= par.N; ++a) {
                const cplx r1 = tv[std::size_t(a - 1)] / par.axy_fn(par.xi_shift(a, 0));
                const cplx r2 = par.d_fn(par.xi_shift(a, 1)) /
                                t_interp(par, tv, par.xi_shift(a, 1));
                CHECK(std::abs(r1 - r2) < 1e-9 * std::max(1.0, std::abs(r1)));
            }
            // quasi-periodicity of the interpolated eigenvalue function
            const cplx lam = rng.box(-1.0, 1.0, -0.3, 0.3);
            const cplx t0v = t_interp(par, tv, lam);
            const double sgn = ((N + par.y) % 2 == 0) ? 1.0 : -1.0;
            CHECK(std::abs(t_interp(par, tv, lam + PI) - sgn * t0v) <
                  1e-9 * std::max(1.0, std::abs(t0v)));
            const cplx mult = std::pow(-std::exp(-2.0i * lam - 1.0i * PI * par.theta.omega),
                                       double(N)) *
                              std::exp(2.0i * pw_base);
            CHECK(std::abs(t_interp(par, tv, lam + PI * par.theta.omega) - mult * t0v) <
                  1e-9 * std::abs(mult) * std::max(1.0, std::abs(t0v)));
        }
        // rigidity: flipping the sign of one value breaks the system
        auto bad = bs.tvals[0];
        bad[0] = -bad[0];
        CHECK(discrete_residual(par, bad) > 1e-2);
        // a random function is far from the variety
        std::vector<cplx> rnd;
        for (int a = 0; a < N; ++a) rnd.push_back(rng.box(-1.0, 1.0, -1.0, 1.0));
        CHECK(discrete_residual(par, rnd) > 1e-2);
    }
}

TEST_CASE("spectrum is independent of the twist") {
    ModelParams par1 = make_params(2, 0, 1, 227);
    ModelParams par2 = par1;
    par2.kappa = cplx(2.0, 1.0);
    BruteSpectrum b1 = brute_spectrum(RepSpace(par1));
    BruteSpectrum b2 = brute_spectrum(RepSpace(par2));
    double sc = 0.0;
    for (auto z : b1.eig) sc = std::max(sc, std::abs(z));
    auto lex = [](cplx a, cplx b) {
        if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    std::sort(b1.eig.begin(), b1.eig.end(), lex);
    std::sort(b2.eig.begin(), b2.eig.end(), lex);
    for (std::size_t k = 0; k < b1.eig.size(); ++k)
        CHECK(std::abs(b1.eig[k] - b2.eig[k]) < 1e-10 * std::max(1.0, sc));
}

TEST_CASE("Newton enumeration of the discrete system matches brute force") {
    for (auto [N, x, y] : {std::tuple{1, 0, 1}, std::tuple{2, 1, 0}, std::tuple{3, 0, 1}}) {
        ModelParams par = make_params(N, x, y, 229 + N);
        RepSpace rs(par);
        BruteSpectrum bs = brute_spectrum(rs);
        auto sols = solve_discrete_system(par);
        REQUIRE(int(sols.size()) == (1 << N));
        std::vector<bool> used(sols.size(), false);
        for (const auto& tv : bs.tvals) {
            const int k = match_index(sols, tv);
            REQUIRE(k >= 0);
            CHECK(!used[std::size_t(k)]);
            used[std::size_t(k)] = true;
            double sc = 1.0;
            for (auto z : tv) sc = std::max(sc, std::abs(z));
            for (int a = 0; a < N; ++a)
                CHECK(std::abs(sols[std::size_t(k)][std::size_t(a)] - tv[std::size_t(a)]) <
                      1e-8 * sc);
        }
    }
}

TEST_CASE("separate states are shared eigenvectors of the transfer family") {
    ModelParams par = make_params(3, 1, 1, 233);
    RepSpace rs(par);
    SovBasis sb(rs, 0);
    BruteSpectrum bs = brute_spectrum(rs);
    const cplx lam = cplx(0.37, -0.14);
    const Mat T = rs.transfer_sector(lam, 0);
    const auto idx = rs.sector_indices(0);
    const int ns = rs.n_spin();
    Mat stack(ns, ns);
    for (int k = 0; k < ns; ++k) {
        const auto& tv = bs.tvals[std::size_t(k)];
        SeparateState st = q_table(par, tv);
        const Vec full = sov_right_state(sb, st);
        Vec v(ns);
        for (int i = 0; i < ns; ++i) v(i) = full(idx[std::size_t(i)]);
        stack.col(k) = v;
        const double vn = v.norm();
        REQUIRE(vn > 1e-12);
        // eigenvector of the transfer matrix at an unrelated spectral parameter
        const cplx tlam = t_interp(par, tv, lam);
        CHECK((T * v - tlam * v).norm() < 1e-8 * std::abs(tlam) * vn);
        // collinear with the brute-force eigenvector of the same eigenvalue
        const Vec b = bs.V.col(k);
        const cplx proj = (b.adjoint() * v)(0, 0) / (b.adjoint() * b)(0, 0);
        CHECK((v - proj * b).norm() < 1e-8 * vn);
        // left state: eigencovector with the same eigenvalue
        const Mat lfull = sov_left_state(sb, st);
        Mat l(1, ns);
        for (int i = 0; i < ns; ++i) l(0, i) = lfull(0, idx[std::size_t(i)]);
        CHECK(max_abs(l * T - tlam * l) < 1e-8 * std::abs(tlam) * max_abs(l));
    }
    // injectivity: the eigenvector family has full rank
    Eigen::JacobiSVD<Mat> svd(stack);
    CHECK(svd.singularValues()(ns - 1) > 1e-8 * svd.singularValues()(0));
    // biorthogonality across distinct eigenvalues
    for (int k = 0; k < ns; ++k) {
        SeparateState stk = q_table(par, bs.tvals[std::size_t(k)]);
        const Mat lk = sov_left_state(sb, stk);
        for (int m = 0; m < ns; ++m) {
            if (m == k) continue;
            SeparateState stm = q_table(par, bs.tvals[std::size_t(m)]);
            const Vec vm = sov_right_state(sb, stm);
            const cplx ip = (lk * vm)(0, 0);
            CHECK(std::abs(ip) < 1e-10 * std::max(1.0, max_abs(lk) * vm.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("scalar products of separate states in determinant form") {
    for (int N : {2, 3}) {
        ModelParams par = make_params(N, 0, 1, 239 + N);
        RepSpace rs(par);
        SovBasis sb(rs, 0);
        BruteSpectrum bs = brute_spectrum(rs);
        // calibration constant linking the dense states to the determinant form
        const cplx ctilde = sb.gram()(0, 0) * theta_gram_det(par, 0, 0u);
        const int ns = rs.n_spin();
        double dscale = 0.0;
        std::vector<SeparateState> sts;
        for (int k = 0; k < ns; ++k) sts.push_back(q_table(par, bs.tvals[std::size_t(k)]));
        for (int k = 0; k < ns; ++k) {
            for (int m = 0; m < ns; ++m) {
                const cplx det = scalar_product_det(par, sts[std::size_t(k)], sts[std::size_t(m)]);
                const cplx direct =
                    (sov_left_state(sb, sts[std::size_t(k)]) * sov_right_state(sb, sts[std::size_t(m)]))(0, 0);
                if (k == m) {
                    CHECK(std::abs(direct - ctilde * det) < 1e-8 * std::abs(direct));
                    dscale = std::max(dscale, std::abs(det));
                } else {
                    CHECK(std::abs(det) < 1e-9 * std::max(1.0, dscale));
                }
            }
        }
        // the determinant and the dense inner product are twist-independent
        ModelParams parq = par;
        parq.kappa = cplx(0.7, 0.4);
        RepSpace rsq(parq);
        SovBasis sbq(rsq, 0);
        for (int k = 0; k < ns; ++k) {
            const cplx d1 =
                (sov_left_state(sb, sts[std::size_t(k)]) * sov_right_state(sb, sts[std::size_t(k)]))(0, 0);
            const cplx d2 =
                (sov_left_state(sbq, sts[std::size_t(k)]) * sov_right_state(sbq, sts[std::size_t(k)]))(0, 0);
            CHECK(std::abs(d1 - d2) < 1e-9 * std::abs(d1));
        }
    }
}

TEST_CASE("spectral gap guard rejects engineered degeneracy") {
    ModelParams par = make_params(2, 0, 1, 241);
    RepSpace rs(par);
    BruteSpectrum bs = brute_spectrum(rs); // generic parameters pass
    double gap = 1e300;
    for (std::size_t i = 0; i < bs.eig.size(); ++i)
        for (std::size_t j = i + 1; j < bs.eig.size(); ++j)
            gap = std::min(gap, std::abs(bs.eig[i] - bs.eig[j]));
    CHECK(gap > 1e3 * par.tol);
}
