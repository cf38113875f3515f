#include "rrlevy/scale.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>

#include "rrlevy/numerics.hpp"

namespace rrlevy {

namespace {

constexpr long double kPi = 3.14159265358979323846264338327950288L;

/// Jump components with coinciding exp_rate merged (the measures are
/// identical, and distinct poles are required below).
std::vector<JumpComponent> merged_components(const ModelSpec& model) {
    std::vector<JumpComponent> comps = model.jumps;
    std::sort(comps.begin(), comps.end(),
              [](const JumpComponent& a, const JumpComponent& b) { return a.exp_rate < b.exp_rate; });
    std::vector<JumpComponent> out;
    for (const auto& c : comps) {
        if (!out.empty() && std::fabs(out.back().exp_rate - c.exp_rate) <=
                                1e-12 * std::max(1.0, c.exp_rate)) {
            out.back().rate += c.rate;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

/// (psi_target(theta) - q) * prod_i (eta_i + theta) as a polynomial.
Polynomial numerator_polynomial(double sigma, double mu, double q,
                                const std::vector<JumpComponent>& comps) {
    Polynomial base;
    if (sigma > 0.0) {
        base.coeff = {static_cast<long double>(-q), static_cast<long double>(mu),
                      0.5L * static_cast<long double>(sigma) * static_cast<long double>(sigma)};
    } else {
        base.coeff = {static_cast<long double>(-q), static_cast<long double>(mu)};
    }
    Polynomial d = Polynomial::constant(1.0L);
    for (const auto& c : comps) d = d * Polynomial::linear_shift(static_cast<long double>(c.exp_rate));
    Polynomial p = base * d;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        Polynomial other = Polynomial{{0.0L, static_cast<long double>(comps[i].rate)}};  // rate * theta
        for (std::size_t j = 0; j < comps.size(); ++j) {
            if (j == i) continue;
            other = other * Polynomial::linear_shift(static_cast<long double>(comps[j].exp_rate));
        }
        p = p - other;
    }
    return p;
}

long double psi_target_ld(const ModelSpec& model, bool drift_changed, long double theta) {
    long double acc = 0.5L * static_cast<long double>(model.sigma) *
                          static_cast<long double>(model.sigma) * theta * theta +
                      static_cast<long double>(model.drift) * theta;
    if (drift_changed) acc -= static_cast<long double>(model.delta) * theta;
    for (const auto& j : model.jumps)
        acc -= static_cast<long double>(j.rate) * theta / (static_cast<long double>(j.exp_rate) + theta);
    return acc;
}

long double psi_target_prime_ld(const ModelSpec& model, bool drift_changed, long double theta) {
    long double acc = static_cast<long double>(model.sigma) * static_cast<long double>(model.sigma) *
                          theta +
                      static_cast<long double>(model.drift);
    if (drift_changed) acc -= static_cast<long double>(model.delta);
    for (const auto& j : model.jumps) {
        const long double d = static_cast<long double>(j.exp_rate) + theta;
        acc -= static_cast<long double>(j.rate) * static_cast<long double>(j.exp_rate) / (d * d);
    }
    return acc;
}

/// Newton steps on psi_target - q push a bracketed root to extended
/// precision; the residues are sensitive to root placement.
long double polish_root_ld(const ModelSpec& model, bool drift_changed, long double q,
                           long double root) {
    for (int it = 0; it < 4; ++it) {
        const long double f = psi_target_ld(model, drift_changed, root) - q;
        const long double d = psi_target_prime_ld(model, drift_changed, root);
        if (d == 0.0L) break;
        const long double step = f / d;
        root -= step;
        if (std::fabs(step) < 1e-19L * std::max(1.0L, std::fabs(root))) break;
    }
    return root;
}

struct TalbotTransform {
    const ModelSpec* model;
    double q;
    ScaleTarget target;
    long double shift;

    std::complex<long double> operator()(std::complex<long double> s) const {
        const std::complex<long double> theta = s + shift;
        const std::complex<long double> denom =
            (target == ScaleTarget::X ? model->psi_complex(theta) : model->psi_y_complex(theta)) -
            static_cast<long double>(q);
        return 1.0L / denom;
    }
};

/// Fixed-Talbot rule, M nodes, extended precision. Inverts the tilted
/// transform and restores the exponential growth afterwards.
double talbot_invert(const TalbotTransform& transform, double x, int m_nodes) {
    const long double t = static_cast<long double>(x);
    const long double r = 2.0L * m_nodes / (5.0L * t);
    long double acc = 0.5L * std::real(transform(std::complex<long double>(r, 0.0L))) *
                      std::exp(r * t);
    for (int k = 1; k < m_nodes; ++k) {
        const long double theta = k * kPi / m_nodes;
        const long double cot = std::cos(theta) / std::sin(theta);
        const std::complex<long double> s(r * theta * cot, r * theta);
        const long double sigma = theta + (theta * cot - 1.0L) * cot;
        const std::complex<long double> term =
            std::exp(s * t) * transform(s) * std::complex<long double>(1.0L, sigma);
        acc += std::real(term);
    }
    const long double g = acc * r / m_nodes;
    const long double value = std::exp(transform.shift * t) * g;
    if (!std::isfinite(static_cast<double>(value))) {
        std::ostringstream msg;
        msg << "talbot_invert: non-finite result at x = " << x;
        throw numeric_error(msg.str());
    }
    return static_cast<double>(value);
}

}  // namespace

double invert_laplace(const ModelSpec& model, double q, ScaleTarget target, double x) {
    if (!(x > 0.0)) throw std::domain_error("invert_laplace: x must be > 0");
    if (q < 0.0) throw std::domain_error("invert_laplace: q must be >= 0");
    const double rate = (target == ScaleTarget::X) ? model.phi(q) : model.varphi(q);
    TalbotTransform transform{&model, q, target, static_cast<long double>(rate)};
    return talbot_invert(transform, x, ScaleEvaluator::kTalbotNodes);
}

ScaleEvaluator::ScaleEvaluator(const ModelSpec& model, double q, ScaleTarget target)
    : model_(model), q_(q), target_(target), cache_state_(std::make_shared<CacheState>()) {}

double ScaleEvaluator::effective_drift() const {
    return target_ == ScaleTarget::X ? model_.drift : model_.drift - model_.delta;
}

double ScaleEvaluator::boundary_value() const {
    if (model_.sigma > 0.0) return 0.0;
    return 1.0 / effective_drift();
}

ScaleEvaluator ScaleEvaluator::build(const ModelSpec& model, double q, ScaleTarget target) {
    if (q < 0.0) throw std::domain_error("ScaleEvaluator::build: q must be >= 0");
    model.validate();
    ScaleEvaluator ev(model, q, target);
    ev.growth_rate_ = (target == ScaleTarget::X) ? model.phi(q) : model.varphi(q);

    const double mu = ev.effective_drift();
    const auto comps = merged_components(model);
    const Polynomial p = numerator_polynomial(model.sigma, mu, q, comps);
    const int degree = p.degree();

    const double slope0 = (target == ScaleTarget::X) ? model.net_drift().first : model.net_drift().second;

    std::vector<long double> roots;
    bool structure_ok = true;
    try {
        if (q == 0.0) {
            if (std::fabs(slope0) < 1e-12) {
                structure_ok = false;  // double root at the origin
            } else {
                roots.push_back(0.0L);
                const Polynomial pd = p.deflate(0.0L);
                if (slope0 < 0.0) {
                    // strictly positive largest root
                    auto f = [&](double t) { return static_cast<double>(pd(t)); };
                    double hi = std::max(1.0, 2.0 * ev.growth_rate_);
                    roots.push_back(static_cast<long double>(find_root_expanding(f, 1e-14, hi)));
                }
                if (!comps.empty() && slope0 > 0.0) {
                    roots.push_back(polynomial_root_bracketed(
                        pd, static_cast<long double>(-comps.front().exp_rate), -1e-300L));
                }
                for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
                    roots.push_back(polynomial_root_bracketed(
                        pd, static_cast<long double>(-comps[i + 1].exp_rate),
                        static_cast<long double>(-comps[i].exp_rate)));
                }
                if (model.sigma > 0.0 && !comps.empty()) {
                    const long double lm = static_cast<long double>(-comps.back().exp_rate);
                    long double width = std::max(1.0L, -lm);
                    long double left = lm - width;
                    while ((pd(left) > 0) == (pd(lm) > 0) && width < 1e12L) {
                        width *= 2.0L;
                        left = lm - width;
                    }
                    roots.push_back(polynomial_root_bracketed(pd, left, lm));
                }
                if (model.sigma > 0.0 && comps.empty() && slope0 > 0.0) {
                    // quadratic with roots 0 and -2 mu / sigma^2
                    roots.push_back(static_cast<long double>(-2.0 * mu / (model.sigma * model.sigma)));
                }
            }
        } else {
            roots.push_back(static_cast<long double>(ev.growth_rate_));
            if (!comps.empty()) {
                roots.push_back(polynomial_root_bracketed(
                    p, static_cast<long double>(-comps.front().exp_rate), 0.0L));
            }
            for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
                roots.push_back(polynomial_root_bracketed(
                    p, static_cast<long double>(-comps[i + 1].exp_rate),
                    static_cast<long double>(-comps[i].exp_rate)));
            }
            if (model.sigma > 0.0) {
                const long double lm =
                    comps.empty() ? 0.0L : static_cast<long double>(-comps.back().exp_rate);
                long double width = std::max(1.0L, -lm + 1.0L);
                long double left = lm - width;
                while ((p(left) > 0) == (p(lm) > 0) && width < 1e12L) {
                    width *= 2.0L;
                    left = lm - width;
                }
                roots.push_back(polynomial_root_bracketed(p, left, lm));
            }
        }
    } catch (const numeric_error&) {
        structure_ok = false;
    }

    if (structure_ok && static_cast<int>(roots.size()) != degree) structure_ok = false;

    if (structure_ok) {
        const bool drift_changed = target == ScaleTarget::Y;
        for (auto& root : roots) {
            if (root != 0.0L) root = polish_root_ld(model, drift_changed, static_cast<long double>(q), root);
        }
        std::sort(roots.begin(), roots.end());
        for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
            if (std::fabs(static_cast<double>(roots[i + 1] - roots[i])) <= kRepeatedRootTol) {
                structure_ok = false;
                ev.backend_note_ = "repeated roots within tolerance";
                break;
            }
        }
    } else if (ev.backend_note_.empty()) {
        ev.backend_note_ = "partial-fraction root structure not resolvable";
    }

    if (structure_ok) {
        const bool drift_changed = target == ScaleTarget::Y;
        long double coeff_sum = 0.0L;
        double coeff_scale = 0.0;
        for (const long double zl : roots) {
            const long double a = 1.0L / psi_target_prime_ld(model, drift_changed, zl);
            ev.exponents_.push_back(static_cast<double>(zl));
            ev.coefficients_.push_back(static_cast<double>(a));
            coeff_sum += a;
            coeff_scale = std::max(coeff_scale, std::fabs(static_cast<double>(a)));
        }
        // Conditioning check: the residues must reproduce W(0+).
        if (std::fabs(static_cast<double>(coeff_sum) - ev.boundary_value()) >
            1e-7 * std::max(1.0, coeff_scale)) {
            structure_ok = false;
            ev.exponents_.clear();
            ev.coefficients_.clear();
            ev.backend_note_ = "partial-fraction conditioning check failed";
        }
    }

    ev.closed_form_ = structure_ok;
    ev.inversion_fallback_ = !structure_ok;
    return ev;
}

double ScaleEvaluator::W(double x) const {
    if (x < 0.0) return 0.0;
    if (closed_form_) {
        double acc = 0.0;
        for (std::size_t j = 0; j < exponents_.size(); ++j)
            acc += coefficients_[j] * std::exp(exponents_[j] * x);
        return acc;
    }
    if (x == 0.0) return boundary_value();
    const auto cache = cache_snapshot(x);
    const double pos = x / cache->h;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), cache->w.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return cache->w[i] + frac * (cache->w[i + 1] - cache->w[i]);
}

double ScaleEvaluator::Wprime(double x) const {
    if (x < 0.0) return 0.0;
    if (closed_form_) {
        double acc = 0.0;
        for (std::size_t j = 0; j < exponents_.size(); ++j)
            acc += coefficients_[j] * exponents_[j] * std::exp(exponents_[j] * x);
        return acc;
    }
    const auto cache = cache_snapshot(x);
    const double pos = x / cache->h;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), cache->w.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return cache->wprime[i] + frac * (cache->wprime[i + 1] - cache->wprime[i]);
}

namespace {

// (exp(z*x) - 1) / z with the z -> 0 limit.
double expm1_over(double z, double x) {
    if (std::fabs(z) < 1e-14) return x;
    return std::expm1(z * x) / z;
}

}  // namespace

double ScaleEvaluator::Wbar(double x) const {
    if (x <= 0.0) return 0.0;
    if (closed_form_) {
        double acc = 0.0;
        for (std::size_t j = 0; j < exponents_.size(); ++j)
            acc += coefficients_[j] * expm1_over(exponents_[j], x);
        return acc;
    }
    const auto cache = cache_snapshot(x);
    const double pos = x / cache->h;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), cache->wbar.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return cache->wbar[i] + frac * (cache->wbar[i + 1] - cache->wbar[i]);
}

double ScaleEvaluator::Z(double x) const {
    if (x <= 0.0) return 1.0;
    return 1.0 + q_ * Wbar(x);
}

double ScaleEvaluator::Zbar(double x) const {
    if (x <= 0.0) return x;
    if (closed_form_) {
        double acc = 0.0;
        for (std::size_t j = 0; j < exponents_.size(); ++j) {
            const double z = exponents_[j];
            if (std::fabs(z) < 1e-14) {
                acc += coefficients_[j] * 0.5 * x * x;
            } else {
                acc += coefficients_[j] * (std::expm1(z * x) / (z * z) - x / z);
            }
        }
        return x + q_ * acc;
    }
    const auto cache = cache_snapshot(x);
    const double pos = x / cache->h;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), cache->zbar.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return cache->zbar[i] + frac * (cache->zbar[i + 1] - cache->zbar[i]);
}

std::shared_ptr<ScaleEvaluator::Cache> ScaleEvaluator::build_cache(double x_max) const {
    auto cache = std::make_shared<Cache>();
    const double h = cache->h;
    const std::size_t n = static_cast<std::size_t>(std::ceil(x_max / h)) + 2;
    TalbotTransform transform{&model_, q_, target_, static_cast<long double>(growth_rate_)};
    cache->w.resize(n);
    cache->w[0] = boundary_value();
    for (std::size_t i = 1; i < n; ++i) {
        cache->w[i] = talbot_invert(transform, static_cast<double>(i) * h, kTalbotNodes);
        if (cache->w[i] <= cache->w[i - 1]) {
            std::ostringstream msg;
            msg << "scale cache: monotonicity violated near x = " << static_cast<double>(i) * h
                << "; refine the grid or reduce x_max";
            throw numeric_error(msg.str());
        }
    }
    cache->wbar.resize(n);
    cache->zbar.resize(n);
    cache->wbar[0] = 0.0;
    cache->zbar[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        cache->wbar[i] = cache->wbar[i - 1] + 0.5 * h * (cache->w[i - 1] + cache->w[i]);
        const double z_prev = 1.0 + q_ * cache->wbar[i - 1];
        const double z_cur = 1.0 + q_ * cache->wbar[i];
        cache->zbar[i] = cache->zbar[i - 1] + 0.5 * h * (z_prev + z_cur);
    }
    cache->wprime.resize(n);
    cache->wprime[0] = (cache->w[1] - cache->w[0]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i)
        cache->wprime[i] = (cache->w[i + 1] - cache->w[i - 1]) / (2.0 * h);
    cache->wprime[n - 1] = (cache->w[n - 1] - cache->w[n - 2]) / h;
    return cache;
}

std::shared_ptr<const ScaleEvaluator::Cache> ScaleEvaluator::cache_snapshot(double x_needed) const {
    std::lock_guard<std::mutex> lock(cache_state_->mutex);
    auto& cache = cache_state_->cache;
    if (!cache || cache->x_max() < x_needed) {
        const double target = std::max(x_needed * 1.25 + 0.5, cache ? cache->x_max() * 2.0 : 1.0);
        cache = build_cache(target);
    }
    return cache;
}

void ScaleEvaluator::ensure_cache(double x_max) const {
    if (closed_form_) return;
    (void)cache_snapshot(x_max);
}

void ScaleEvaluator::dump_csv(std::ostream& os, double x_max, double step) const {
    os << "x,W,Z\n";
    char buf[96];
    for (double x = 0.0; x <= x_max + 1e-15; x += step) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x, W(x), Z(x));
        os << buf;
    }
}

}  // namespace rrlevy
