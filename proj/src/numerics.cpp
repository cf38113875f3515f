#include "rrlevy/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace rrlevy {

namespace {

GaussLegendreRule compute_rule(int order) {
    // Newton iteration on Legendre polynomials, symmetric nodes.
    GaussLegendreRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double pi = 3.14159265358979323846;
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (order + 0.5));
        double z1, pp;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < order; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = order * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        } while (std::fabs(z - z1) > 1e-15);
        rule.nodes[i] = -z;
        rule.nodes[order - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[order - 1 - i] = rule.weights[i];
    }
    return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
    static std::mutex mtx;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

double gl_panel(const std::function<double(double)>& f, double lo, double hi, int order) {
    const auto& rule = gauss_legendre(order);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < order; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

double gl_integrate(const std::function<double(double)>& f, double lo, double hi,
                    int order, int panels) {
    if (!(hi > lo)) return 0.0;
    if (panels < 1) panels = 1;
    const double width = (hi - lo) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * width;
        const double b = (p + 1 == panels) ? hi : a + width;
        acc += gl_panel(f, a, b, order);
    }
    return acc;
}

int convolution_panels(double len) {
    if (!(len > 0)) return 0;
    const double k = std::ceil(len / 0.05);
    return std::max(8, static_cast<int>(k));
}

double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           const RootFindOptions& opts) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) {
        std::ostringstream msg;
        msg << "find_root_bracketed: no sign change on [" << lo << ", " << hi
            << "], f = [" << flo << ", " << fhi << "]";
        throw numeric_error(msg.str());
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iter; ++it) {
        // Secant proposal, guarded by the bracket.
        double xs = lo - flo * (hi - lo) / (fhi - flo);
        if (!std::isfinite(xs) || xs <= lo || xs >= hi) xs = 0.5 * (lo + hi);
        x = xs;
        const double fx = f(x);
        if (fx == 0.0 || hi - lo < opts.abs_tol) return x;
        if (flo * fx < 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        // Occasional plain bisection keeps the bracket shrinking.
        if ((it & 3) == 3) {
            const double xm = 0.5 * (lo + hi);
            const double fm = f(xm);
            if (fm == 0.0) return xm;
            if (flo * fm < 0.0) {
                hi = xm;
                fhi = fm;
            } else {
                lo = xm;
                flo = fm;
            }
        }
    }
    if (hi - lo < 1e6 * opts.abs_tol) return 0.5 * (lo + hi);
    std::ostringstream msg;
    msg << "find_root_bracketed: no convergence after " << opts.max_iter
        << " iterations, bracket [" << lo << ", " << hi << "]";
    throw numeric_error(msg.str());
}

double find_root_expanding(const std::function<double(double)>& f, double lo, double start_hi,
                           const RootFindOptions& opts) {
    const double flo = f(lo);
    if (flo == 0.0) return lo;
    double hi = start_hi;
    for (int k = 0; k < 200; ++k) {
        if (f(hi) * flo <= 0.0) return find_root_bracketed(f, lo, hi, opts);
        hi = lo + (hi - lo) * 2.0;
    }
    std::ostringstream msg;
    msg << "find_root_expanding: no sign change between " << lo << " and " << hi;
    throw numeric_error(msg.str());
}

long double Polynomial::operator()(long double x) const {
    long double acc = 0.0L;
    for (std::size_t i = coeff.size(); i-- > 0;) acc = acc * x + coeff[i];
    return acc;
}

Polynomial Polynomial::derivative() const {
    Polynomial d;
    if (coeff.size() <= 1) {
        d.coeff = {0.0L};
        return d;
    }
    d.coeff.resize(coeff.size() - 1);
    for (std::size_t i = 1; i < coeff.size(); ++i) d.coeff[i - 1] = coeff[i] * static_cast<long double>(i);
    return d;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    Polynomial r;
    r.coeff.assign(coeff.size() + other.coeff.size() - 1, 0.0L);
    for (std::size_t i = 0; i < coeff.size(); ++i)
        for (std::size_t j = 0; j < other.coeff.size(); ++j) r.coeff[i + j] += coeff[i] * other.coeff[j];
    return r;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    Polynomial r;
    r.coeff.assign(std::max(coeff.size(), other.coeff.size()), 0.0L);
    for (std::size_t i = 0; i < coeff.size(); ++i) r.coeff[i] += coeff[i];
    for (std::size_t i = 0; i < other.coeff.size(); ++i) r.coeff[i] += other.coeff[i];
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
    return *this + other.scaled(-1.0L);
}

Polynomial Polynomial::scaled(long double s) const {
    Polynomial r = *this;
    for (auto& c : r.coeff) c *= s;
    return r;
}

Polynomial Polynomial::deflate(long double root) const {
    // Synthetic division by (x - root); remainder discarded.
    Polynomial r;
    const std::size_t n = coeff.size();
    if (n <= 1) {
        r.coeff = {0.0L};
        return r;
    }
    r.coeff.assign(n - 1, 0.0L);
    long double carry = coeff[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        r.coeff[i] = carry;
        carry = coeff[i] + carry * root;
    }
    return r;
}

long double polynomial_root_bracketed(const Polynomial& p, long double lo, long double hi) {
    long double flo = p(lo), fhi = p(hi);
    if (flo == 0.0L) return lo;
    if (fhi == 0.0L) return hi;
    if ((flo > 0) == (fhi > 0)) {
        std::ostringstream msg;
        msg << "polynomial_root_bracketed: no sign change on [" << static_cast<double>(lo)
            << ", " << static_cast<double>(hi) << "]";
        throw numeric_error(msg.str());
    }
    const Polynomial dp = p.derivative();
    long double x = 0.5L * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const long double fx = p(x);
        if (fx == 0.0L) return x;
        if ((flo > 0) == (fx > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        const long double d = dp(x);
        long double xn = (d != 0.0L) ? x - fx / d : 0.5L * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5L * (lo + hi);
        const long double tol = 1e-14L * std::max(1.0L, std::fabs(xn));
        if (std::fabs(xn - x) < tol || hi - lo < tol) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

}  // namespace rrlevy
