#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrlevy {

/// Raised when an iterative numerical procedure fails to converge or
/// produces a non-finite / inconsistent result.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Rule of the given order; computed once per order and cached.
const GaussLegendreRule& gauss_legendre(int order);

/// Single-panel Gauss-Legendre integral of f over [lo, hi].
double gl_panel(const std::function<double(double)>& f, double lo, double hi, int order);

/// Composite Gauss-Legendre integral of f over [lo, hi] with `panels`
/// equal subintervals. Returns 0 for an empty or inverted range.
double gl_integrate(const std::function<double(double)>& f, double lo, double hi,
                    int order, int panels);

/// Panel count used by the convolution integrals: max(8, ceil(len / 0.05)).
int convolution_panels(double len);

struct RootFindOptions {
    double abs_tol = 1e-12;
    int max_iter = 200;
};

/// Largest root of f on [lo, hi] given f(lo) and f(hi) of opposite sign.
/// Bisection with secant acceleration; the bracket never widens.
double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           const RootFindOptions& opts = {});

/// Expands `hi` geometrically from `start` until f changes sign against
/// f(lo), then solves. Throws numeric_error with bracket diagnostics if no
/// sign change is found.
double find_root_expanding(const std::function<double(double)>& f, double lo, double start_hi,
                           const RootFindOptions& opts = {});

/// Dense polynomial with ascending coefficients, long double arithmetic.
/// Small degrees only (partial-fraction numerators).
struct Polynomial {
    std::vector<long double> coeff;  // coeff[k] multiplies x^k

    long double operator()(long double x) const;
    Polynomial derivative() const;
    int degree() const { return static_cast<int>(coeff.size()) - 1; }

    static Polynomial constant(long double c) { return Polynomial{{c}}; }
    /// (x + a)
    static Polynomial linear_shift(long double a) { return Polynomial{{a, 1.0L}}; }
    Polynomial operator*(const Polynomial& other) const;
    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;
    Polynomial scaled(long double s) const;
    /// Divides by (x - root) assuming the remainder is negligible.
    Polynomial deflate(long double root) const;
};

/// Root of p inside [lo, hi] (sign change required), bisection + Newton
/// polish to ~1e-12 relative accuracy.
long double polynomial_root_bracketed(const Polynomial& p, long double lo, long double hi);

}  // namespace rrlevy
