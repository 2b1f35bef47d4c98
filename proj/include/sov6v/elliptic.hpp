#ifndef SOV6V_ELLIPTIC_HPP
#define SOV6V_ELLIPTIC_HPP

// Theta functions with quasi-periods (pi, pi*omega), the auxiliary variants
// used by the different (x,y) sectors, elliptic-polynomial interpolation and
// the basis/Frobenius determinant identities.
//
// theta(z) here is theta_1(z|omega) evaluated by its truncated exponential
// series; the infinite-product form is kept only as an independent oracle for
// the tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "sov6v/common.hpp"

namespace sov6v {

struct ThetaParams {
    cplx omega{0.0, 1.0};   // half-period ratio, Im > 0
    int series_cutoff = 0;  // 0 => adaptive from |e^{i pi omega}| and Im z
    double tol = 1e-12;

    void check() const {
        if (!(omega.imag() > 0.0))
            fail("DivergenceGuard", "Im(omega) must be positive");
    }
};

namespace detail {

// Smallest K such that the dropped k=K series term of theta_1 is below
// tol*1e-2 in modulus; the bound includes e^{(2k+1)|Im z|} from sin((2k+1)z).
inline int theta_cutoff(const ThetaParams& p, double abs_im_z) {
    if (p.series_cutoff > 0) return p.series_cutoff;
    const double log_q = -PI * p.omega.imag(); // log|e^{i pi omega}|
    const double thresh = std::log(p.tol * 1e-2);
    for (int k = 2; k < 200; ++k) {
        double log_term = log_q * (k + 0.5) * (k + 0.5) + (2 * k + 1) * abs_im_z;
        if (log_term < thresh) return k;
    }
    fail("DivergenceGuard", "theta series cutoff exceeded 200 terms");
}

} // namespace detail

// theta_1(z|omega) = 2 sum_{k>=0} (-1)^k e^{i pi omega (k+1/2)^2} sin((2k+1)z)
inline cplx theta1(cplx z, const ThetaParams& p) {
    p.check();
    const int K = detail::theta_cutoff(p, std::abs(z.imag()));
    cplx s = 0.0;
    double sign = 1.0;
    for (int k = 0; k < K; ++k) {
        cplx e = std::exp(1i * PI * p.omega * (k + 0.5) * (k + 0.5));
        s += sign * e * std::sin((2.0 * k + 1.0) * z);
        sign = -sign;
    }
    return 2.0 * s;
}

// d/dz theta_1(z|omega)
inline cplx theta1_prime(cplx z, const ThetaParams& p) {
    p.check();
    const int K = detail::theta_cutoff(p, std::abs(z.imag()));
    cplx s = 0.0;
    double sign = 1.0;
    for (int k = 0; k < K; ++k) {
        cplx e = std::exp(1i * PI * p.omega * (k + 0.5) * (k + 0.5));
        s += sign * e * (2.0 * k + 1.0) * std::cos((2.0 * k + 1.0) * z);
        sign = -sign;
    }
    return 2.0 * s;
}

// Infinite-product form of theta_1 (test oracle only):
// 2 e^{i pi omega/4} sin z prod_n (1-e^{2i(n pi omega - z)})(1-e^{2i(n pi omega + z)})(1-e^{2i n pi omega})
inline cplx theta1_product(cplx z, const ThetaParams& p) {
    p.check();
    cplx prod = 2.0 * std::exp(1i * PI * p.omega / 4.0) * std::sin(z);
    const double thresh = p.tol * 1e-3;
    for (int n = 1; n < 400; ++n) {
        cplx w = std::exp(2.0i * (double(n) * PI * p.omega));
        cplx fz = std::exp(-2.0i * z);
        prod *= (1.0 - w * fz) * (1.0 - w / fz) * (1.0 - w);
        if (std::abs(w) * std::max(std::abs(fz), 1.0 / std::abs(fz)) < thresh) break;
    }
    return prod;
}

// Standard companions theta_2, theta_3, theta_4 (same nome e^{i pi omega}).
inline cplx theta2(cplx z, const ThetaParams& p) {
    p.check();
    const int K = detail::theta_cutoff(p, std::abs(z.imag()));
    cplx s = 0.0;
    for (int k = 0; k < K; ++k)
        s += std::exp(1i * PI * p.omega * (k + 0.5) * (k + 0.5)) *
             std::cos((2.0 * k + 1.0) * z);
    return 2.0 * s;
}

inline cplx theta3(cplx z, const ThetaParams& p) {
    p.check();
    const int K = detail::theta_cutoff(p, std::abs(z.imag())) + 1;
    cplx s = 1.0;
    for (int k = 1; k < K; ++k)
        s += 2.0 * std::exp(1i * PI * p.omega * double(k) * double(k)) *
             std::cos(2.0 * k * z);
    return s;
}

inline cplx theta4(cplx z, const ThetaParams& p) {
    p.check();
    const int K = detail::theta_cutoff(p, std::abs(z.imag())) + 1;
    cplx s = 1.0;
    double sign = -1.0;
    for (int k = 1; k < K; ++k) {
        s += 2.0 * sign * std::exp(1i * PI * p.omega * double(k) * double(k)) *
             std::cos(2.0 * k * z);
        sign = -sign;
    }
    return s;
}

// Sector-dependent variants:
//   X0: theta_1(z/2 | omega/2)                            (case x=0)
//   Y0: theta_1(z | 2 omega)                              (case y=0)
//   XY: e^{iz/2} theta_1(z/2|omega) theta_1((z+pi+pi*omega)/2 | omega)   (case x=y)
enum class ThetaVariant { STD, X0, Y0, XY };

inline cplx theta_variant(ThetaVariant tag, cplx z, const ThetaParams& p) {
    switch (tag) {
    case ThetaVariant::STD: return theta1(z, p);
    case ThetaVariant::X0: {
        ThetaParams ph = p; ph.omega = p.omega / 2.0;
        return theta1(z / 2.0, ph);
    }
    case ThetaVariant::Y0: {
        ThetaParams pd = p; pd.omega = 2.0 * p.omega;
        return theta1(z, pd);
    }
    case ThetaVariant::XY:
        return std::exp(0.5i * z) * theta1(z / 2.0, p) *
               theta1((z + PI + PI * p.omega) / 2.0, p);
    }
    fail("UnknownTag", "theta_variant");
}

inline cplx theta_variant_prime(ThetaVariant tag, cplx z, const ThetaParams& p) {
    switch (tag) {
    case ThetaVariant::STD: return theta1_prime(z, p);
    case ThetaVariant::X0: {
        ThetaParams ph = p; ph.omega = p.omega / 2.0;
        return 0.5 * theta1_prime(z / 2.0, ph);
    }
    case ThetaVariant::Y0: {
        ThetaParams pd = p; pd.omega = 2.0 * p.omega;
        return theta1_prime(z, pd);
    }
    case ThetaVariant::XY: {
        cplx a = theta1(z / 2.0, p);
        cplx b = theta1((z + PI + PI * p.omega) / 2.0, p);
        cplx da = 0.5 * theta1_prime(z / 2.0, p);
        cplx db = 0.5 * theta1_prime((z + PI + PI * p.omega) / 2.0, p);
        return std::exp(0.5i * z) * (0.5i * a * b + da * b + a * db);
    }
    }
    fail("UnknownTag", "theta_variant_prime");
}

// ---- lattice Gamma = pi Z + pi omega Z ------------------------------------

// Real coordinates (alpha, beta) with z = alpha*pi + beta*pi*omega.
inline std::pair<double, double> lattice_coords(cplx z, const ThetaParams& p) {
    double beta = z.imag() / (PI * p.omega.imag());
    double alpha = (z.real() - beta * PI * p.omega.real()) / PI;
    return {alpha, beta};
}

// Distance from z to the nearest point of Gamma.
inline double lattice_distance(cplx z, const ThetaParams& p) {
    auto [a, b] = lattice_coords(z, p);
    double da = a - std::round(a);
    double db = b - std::round(b);
    return std::abs(da * PI + db * PI * p.omega);
}

// Numerical band for the paper-exact conditions "notin Gamma".
inline double lattice_band(const ThetaParams& p) { return 1e3 * p.tol; }

inline bool on_lattice(cplx z, const ThetaParams& p) {
    return lattice_distance(z, p) < lattice_band(p);
}

// ---- order-N basis and interpolation ---------------------------------------

// vartheta_j, 0 <= j <= N-1: basis of the theta functions of order N, norm 0:
//   vartheta_j(z) = sum_n e^{i pi N omega (n+1/2-j/N)^2 + 2 i N (n+1/2-j/N)(z - pi/2)}
inline cplx vartheta_basis(int j, int N, cplx z, const ThetaParams& p) {
    p.check();
    if (j < 0 || j >= N) fail("IndexOutOfRange", "vartheta_basis j");
    const double thresh = std::log(p.tol * 1e-2);
    const double imw = p.omega.imag();
    cplx s = 0.0;
    // m = n + 1/2 - j/N; sum symmetric in n until the term bound drops.
    for (int n = 0; ; ++n) {
        bool small = true;
        for (int sgn : {0, 1}) {
            int nn = sgn == 0 ? n : -1 - n;
            double m = nn + 0.5 - double(j) / N;
            cplx term = std::exp(1i * PI * double(N) * p.omega * m * m +
                                 2.0i * double(N) * m * (z - PI / 2.0));
            s += term;
            double log_bound = -PI * N * imw * m * m + 2.0 * N * std::abs(m) * std::abs(z.imag());
            if (log_bound >= thresh) small = false;
        }
        if (small && n >= 2) break;
        if (n > 200) fail("DivergenceGuard", "vartheta series cutoff exceeded");
    }
    return s;
}

// Unique theta function of order n = points.size() and norm alpha through the
// data, evaluated at z:
//   f(z) = sum_j theta(alpha - sum_k x_k + x_j - z)/theta(alpha - sum_k x_k)
//          * prod_{k!=j} theta(z-x_k)/theta(x_j-x_k) * f(x_j)
inline cplx interpolate(const std::vector<cplx>& points, const std::vector<cplx>& values,
                        cplx alpha, cplx z, const ThetaParams& p) {
    const std::size_t n = points.size();
    if (values.size() != n || n == 0) fail("IndexOutOfRange", "interpolate sizes");
    cplx sum_x = 0.0;
    for (auto x : points) sum_x += x;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (on_lattice(points[i] - points[j], p))
                fail("IndependenceViolation", "interpolation points coincide mod lattice");
    if (on_lattice(sum_x - alpha, p))
        fail("IndependenceViolation", "sum of points minus norm lies on the lattice");
    const cplx denom0 = theta1(alpha - sum_x, p);
    cplx f = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        cplx term = values[j] * theta1(alpha - sum_x + points[j] - z, p) / denom0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            term *= theta1(z - points[k], p) / theta1(points[j] - points[k], p);
        }
        f += term;
    }
    return f;
}

// ---- determinant identities -------------------------------------------------

// det over the vartheta basis at N points, computed directly (Laplace for the
// small sizes used here would do; we use LU-free recursive expansion to avoid
// an Eigen dependency at this layer).
inline cplx vartheta_det(const std::vector<cplx>& x, const ThetaParams& p) {
    const int N = int(x.size());
    std::vector<cplx> m(std::size_t(N) * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            m[std::size_t(i) * N + j] = vartheta_basis(j, N, x[std::size_t(i)], p);
    // In-place LU with partial pivoting.
    cplx det = 1.0;
    for (int c = 0; c < N; ++c) {
        int piv = c;
        for (int r = c + 1; r < N; ++r)
            if (std::abs(m[std::size_t(r) * N + c]) > std::abs(m[std::size_t(piv) * N + c])) piv = r;
        if (piv != c) {
            for (int j = 0; j < N; ++j) std::swap(m[std::size_t(piv) * N + j], m[std::size_t(c) * N + j]);
            det = -det;
        }
        cplx d = m[std::size_t(c) * N + c];
        det *= d;
        if (d == 0.0) return 0.0;
        for (int r = c + 1; r < N; ++r) {
            cplx f = m[std::size_t(r) * N + c] / d;
            for (int j = c; j < N; ++j) m[std::size_t(r) * N + j] -= f * m[std::size_t(c) * N + j];
        }
    }
    return det;
}

// Product side of the basis-determinant identity (norm 0):
//   theta(sum_l x_l) * prod_{i<j} theta(x_i - x_j)
inline cplx vartheta_det_product(const std::vector<cplx>& x, const ThetaParams& p) {
    cplx sum_x = 0.0;
    for (auto v : x) sum_x += v;
    cplx prod = theta1(sum_x, p);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            prod *= theta1(x[i] - x[j], p);
    return prod;
}

// Calibration constant c_N: det[vartheta_{j-1}(x_i)] = c_N * product side.
// Computed once per (N, omega) from a fixed seeded point set.
inline cplx calibrate_cN(int N, const ThetaParams& p, std::uint64_t seed = 20150623) {
    Rng rng(seed + std::uint64_t(N));
    for (int attempt = 0; attempt < 16; ++attempt) {
        std::vector<cplx> x;
        for (int i = 0; i < N; ++i)
            x.push_back(rng.box(-1.2, 1.2, -0.5, 0.5));
        cplx prod = vartheta_det_product(x, p);
        cplx sum_x = 0.0;
        for (auto v : x) sum_x += v;
        bool ok = !on_lattice(sum_x, p);
        for (std::size_t i = 0; ok && i < x.size(); ++i)
            for (std::size_t j = i + 1; ok && j < x.size(); ++j)
                if (on_lattice(x[i] - x[j], p)) ok = false;
        if (!ok || std::abs(prod) < 1e-8) continue;
        return vartheta_det(x, p) / prod;
    }
    fail("SingularCalibration", "calibration points Gamma-degenerate");
}

// Frobenius determinant, product side:
//   det[ theta(x_i-y_j+t) / (theta(x_i-y_j) theta(t)) ]
//     = theta(sum(x_j-y_j)+t)/theta(t) * prod_{i<j} theta(x_i-x_j) theta(y_j-y_i)
//       / prod_{i,j} theta(x_i-y_j)
inline cplx frobenius_det(const std::vector<cplx>& x, const std::vector<cplx>& y,
                          cplx t, const ThetaParams& p) {
    const std::size_t n = x.size();
    if (y.size() != n) fail("IndexOutOfRange", "frobenius_det sizes");
    if (on_lattice(t, p)) fail("PoleOnLattice", "t on the lattice");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (on_lattice(x[i] - y[j], p)) fail("PoleOnLattice", "x_i - y_j on the lattice");
    cplx sum = t;
    for (std::size_t j = 0; j < n; ++j) sum += x[j] - y[j];
    cplx val = theta1(sum, p) / theta1(t, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            val *= theta1(x[i] - x[j], p) * theta1(y[j] - y[i], p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            val /= theta1(x[i] - y[j], p);
    return val;
}

} // namespace sov6v

#endif // SOV6V_ELLIPTIC_HPP
