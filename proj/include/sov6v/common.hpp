#ifndef SOV6V_COMMON_HPP
#define SOV6V_COMMON_HPP

// Shared scalar types, error reporting and the deterministic RNG used by the
// whole library.  Everything is double-precision complex; tolerances travel
// with the parameter structs, never as globals.

#include <complex>
#include <random>
#include <stdexcept>
#include <string>

namespace sov6v {

using cplx = std::complex<double>;
using namespace std::complex_literals;

inline constexpr double PI = 3.141592653589793238462643383279502884;

// Error taxonomy: one exception type, tagged with a stable code string so the
// CLI can report machine-readable failure identifiers.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }
private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
    throw Error(code, what);
}

// Deterministic RNG.  All random draws in the library/tests go through this so
// that a (seed) pair pins down every number in a report.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }
    cplx box(double re_lo, double re_hi, double im_lo, double im_hi) {
        // Order of draws fixed: real part first.
        double re = uniform(re_lo, re_hi);
        double im = uniform(im_lo, im_hi);
        return {re, im};
    }
private:
    std::mt19937_64 gen_;
};

} // namespace sov6v

#endif // SOV6V_COMMON_HPP
