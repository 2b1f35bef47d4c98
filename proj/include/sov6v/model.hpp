#ifndef SOV6V_MODEL_HPP
#define SOV6V_MODEL_HPP

// Global model parameters of one instance of the antiperiodic dynamical
// 6-vertex chain: quasi-period ratio omega, crossing parameter eta, the
// half-period shift choice (x,y), chain length N, inhomogeneities xi_n and
// the twist kappa.  Also the derived scalar functions a(lambda), d(lambda)
// and the height lattice t_{r,h}.

#include <vector>

#include "sov6v/elliptic.hpp"

namespace sov6v {

struct ModelParams {
    ThetaParams theta;            // omega + series handling + base tolerance
    cplx eta{0.377, 0.411};
    int x = 0;                    // in {0,1}
    int y = 1;                    // in {0,1}
    int N = 2;
    std::vector<cplx> xi;         // inhomogeneity parameters, size N
    cplx kappa{1.0, 0.0};         // antiperiodic twist
    double tol = 1e-12;

    // t_0 = -(eta/2) N + x pi/2 + y pi omega /2
    cplx t0() const {
        return -0.5 * eta * double(N) + 0.5 * x * PI + 0.5 * y * PI * theta.omega;
    }
    // tau eigenvalue of the canonical dynamical state with index a
    cplx t_of_a(int a) const { return t0() - eta * double(a); }

    // s_h = sum_k (1 - 2 h_k) for a spin bitmask (h_1 = least significant bit)
    int s_of(unsigned hmask) const { return N - 2 * __builtin_popcount(hmask); }

    // t_{r,h} = -(eta/2) s_h + x pi/2 + y pi omega/2 + r eta
    cplx t_rh(int r, unsigned hmask) const {
        return t0() + eta * double(__builtin_popcount(hmask)) + eta * double(r);
    }

    // shifted inhomogeneity xi_a^{(h_a)} = xi_a - eta h_a (1-based site index)
    cplx xi_shift(int n, int h) const { return xi[std::size_t(n - 1)] - eta * double(h); }

    // a(lambda) = prod_n theta(lambda - xi_n + eta), d(lambda) = a(lambda - eta)
    cplx a_fn(cplx lam) const {
        cplx v = 1.0;
        for (auto z : xi) v *= theta1(lam - z + eta, theta);
        return v;
    }
    cplx d_fn(cplx lam) const { return a_fn(lam - eta); }

    // sign carried by the antiperiodic spectrum conditions
    double sign_xy() const { return ((x + y + x * y) % 2 == 0) ? 1.0 : -1.0; }
    cplx axy_fn(cplx lam) const { return sign_xy() * a_fn(lam); }

    // Parameter validity: parity rule, inhomogeneity non-degeneracy and the
    // genericity band for eta (non-rational up to denominator 64).
    void validate() const {
        theta.check();
        if (x == 0 && y == 0 && N % 2 == 0)
            fail("InvalidModel", "(x,y)=(0,0) requires N odd");
        if (int(xi.size()) != N) fail("InvalidModel", "xi size != N");
        if (std::abs(kappa) == 0.0) fail("InvalidModel", "kappa must be nonzero");
        check_cond_inh();
        check_eta_generic();
    }

    void check_cond_inh(double margin_factor = 1.0) const {
        const double band = margin_factor * lattice_band(theta);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                if (a == b) continue;
                for (int eps = -1; eps <= 1; ++eps)
                    if (lattice_distance(xi[std::size_t(a)] - xi[std::size_t(b)] +
                                         double(eps) * eta, theta) < band)
                        fail("ConfigError", "inhomogeneity condition violated at pair (" +
                                            std::to_string(a + 1) + "," + std::to_string(b + 1) +
                                            "," + std::to_string(eps) + ")");
            }
    }

    void check_eta_generic(int max_denominator = 64) const {
        for (int q = 1; q <= max_denominator; ++q)
            if (lattice_distance(double(q) * eta, theta) < lattice_band(theta))
                fail("InvalidModel", "eta rational w.r.t. the quasi-periods (denominator " +
                                     std::to_string(q) + ")");
    }
};

// Seeded generic parameter set: xi drawn from a fixed box, redrawn until the
// non-degeneracy condition holds with a wide margin.
inline ModelParams make_params(int N, int x, int y, std::uint64_t seed,
                               cplx omega = cplx(0.0, 1.0),
                               cplx eta = cplx(0.377, 0.411),
                               cplx kappa = cplx(1.0, 0.0)) {
    ModelParams par;
    par.theta.omega = omega;
    par.theta.tol = 1e-12;
    par.eta = eta;
    par.x = x;
    par.y = y;
    par.N = N;
    par.kappa = kappa;
    Rng rng(seed);
    for (int attempt = 0; attempt < 256; ++attempt) {
        par.xi.clear();
        for (int n = 0; n < N; ++n)
            par.xi.push_back(rng.box(-1.0, 1.0, -0.25, 0.25));
        try {
            par.check_cond_inh(1e6); // wide margin: min distance > 1e-3 roughly
        } catch (const Error&) {
            continue;
        }
        par.validate();
        return par;
    }
    fail("ConfigError", "could not draw generic inhomogeneities");
}

} // namespace sov6v

#endif // SOV6V_MODEL_HPP
