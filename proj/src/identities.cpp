#include "rrlevy/identities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rrlevy/numerics.hpp"

namespace rrlevy {

IdentityContext::IdentityContext(const ModelSpec& model, QuadratureSettings quad)
    : model_(model), quad_(quad) {
    model_.validate();
}

const ScaleEvaluator& IdentityContext::evaluator(ScaleTarget target, double q) const {
    const auto key = std::make_pair(static_cast<int>(target), q);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = evaluators_.find(key);
    if (it == evaluators_.end()) {
        auto ev = std::make_shared<const ScaleEvaluator>(ScaleEvaluator::build(model_, q, target));
        it = evaluators_.emplace(key, std::move(ev)).first;
    }
    return *it->second;
}

double IdentityContext::convolve(double kernel_q, const std::function<double(double)>& f,
                                 double x) const {
    const double b = model_.b;
    if (!(x > b)) return 0.0;
    const ScaleEvaluator& wy = evaluator(ScaleTarget::Y, kernel_q);
    const int panels = std::max(quad_.min_panels,
                                static_cast<int>(std::ceil((x - b) / quad_.panel_width)));
    auto integrand = [&](double y) {
        const double fy = f(y);
        if (!std::isfinite(fy)) {
            std::ostringstream msg;
            msg << "convolve: non-finite integrand sample at y = " << y;
            throw numeric_error(msg.str());
        }
        return wy.W(x - y) * fy;
    };
    const double value = gl_integrate(integrand, b, x, quad_.order, panels);
    if (quad_.self_check) {
        const double refined = gl_integrate(integrand, b, x, quad_.order, 2 * panels);
        const double scale = std::max({std::fabs(value), std::fabs(refined), 1e-8});
        if (std::fabs(value - refined) > quad_.self_check_tol * scale) {
            std::ostringstream msg;
            msg << "convolve: panel-doubling self-check failed on [" << b << ", " << x
                << "]: " << value << " vs " << refined;
            throw numeric_error(msg.str());
        }
    }
    return value;
}

double IdentityContext::r(double q, double x) const {
    const ScaleEvaluator& wx = evaluator(ScaleTarget::X, q);
    double value = wx.Z(x);
    if (q > 0.0 && model_.delta > 0.0 && x > model_.b)
        value += q * model_.delta * convolve(q, [&](double y) { return wx.W(y); }, x);
    return value;
}

double IdentityContext::r_tilde(double q, double x) const {
    if (!(q > 0.0)) throw std::domain_error("r_tilde: q must be > 0");
    const ScaleEvaluator& wx = evaluator(ScaleTarget::X, q);
    double value = wx.Zbar(x) + model_.net_drift().first / q;
    if (model_.delta > 0.0 && x > model_.b)
        value += model_.delta * convolve(q, [&](double y) { return wx.Z(y); }, x);
    return value;
}

double IdentityContext::kernel_w(double q, double x, double z) const {
    if (z < 0.0) throw std::domain_error("kernel_w: z must be >= 0");
    const double b = model_.b;
    if (z == 0.0 || z == b) return 0.0;
    if (z < b) {
        const ScaleEvaluator& wx = evaluator(ScaleTarget::X, q);
        double value = wx.W(x - z);
        if (model_.delta > 0.0 && x > b)
            value += model_.delta * convolve(q, [&](double y) { return wx.Wprime(y - z); }, x);
        return value;
    }
    if (z < x) return evaluator(ScaleTarget::Y, q).W(x - z);
    return 0.0;
}

double IdentityContext::resolvent_density(double q, double x, double a, double z) const {
    if (!(x <= a)) throw std::domain_error("resolvent_density: requires x <= a");
    if (!(z >= 0.0 && z <= a)) throw std::domain_error("resolvent_density: requires 0 <= z <= a");
    const double value = kernel_w(q, a, z) * r(q, x) / r(q, a) - kernel_w(q, x, z);
    if (value < -1e-9) {
        std::ostringstream msg;
        msg << "resolvent_density: negative density " << value << " at z = " << z
            << " (quadrature failure)";
        throw numeric_error(msg.str());
    }
    return value;
}

double IdentityContext::resolvent_band_mass(double q, double x, double a, double z1,
                                            double z2) const {
    if (!(x <= a)) throw std::domain_error("resolvent_band_mass: requires x <= a");
    z1 = std::max(z1, 0.0);
    z2 = std::min(z2, a);
    if (!(z2 > z1)) return 0.0;
    const double ratio = r(q, x) / r(q, a);
    // kernel_w has kinks at b and a jump at x (bounded variation), so the
    // z-integral runs piecewise between those breakpoints.
    std::vector<double> cuts{z1, z2};
    for (double c : {model_.b, x}) {
        if (c > z1 && c < z2) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        const int panels = std::max(quad_.min_panels,
                                    static_cast<int>(std::ceil((hi - lo) / quad_.panel_width)));
        acc += gl_integrate(
            [&](double z) { return kernel_w(q, a, z) * ratio - kernel_w(q, x, z); }, lo, hi,
            quad_.order, panels);
    }
    return acc;
}

double IdentityContext::infinite_horizon_cutoff(double q) const {
    const double gap = model_.varphi(q) - model_.phi(q);
    if (!(gap > 0.0))
        throw std::domain_error(
            "infinite-horizon formula requires varphi(q) > Phi(q) (delta > 0)");
    return model_.b + 40.0 / gap;
}

double IdentityContext::tail_integral_W(double q) const {
    const double vphi = model_.varphi(q);
    const double y_max = infinite_horizon_cutoff(q);
    const ScaleEvaluator& wx = evaluator(ScaleTarget::X, q);
    wx.ensure_cache(y_max);
    const int panels = std::max(quad_.min_panels,
                                static_cast<int>(std::ceil((y_max - model_.b) / quad_.panel_width)));
    return gl_integrate([&](double y) { return std::exp(-vphi * y) * wx.W(y); }, model_.b, y_max,
                        quad_.order, panels);
}

double IdentityContext::tail_integral_Wprime(double q, double z) const {
    const double vphi = model_.varphi(q);
    const double y_max = infinite_horizon_cutoff(q);
    const ScaleEvaluator& wx = evaluator(ScaleTarget::X, q);
    wx.ensure_cache(y_max);
    const int panels = std::max(quad_.min_panels,
                                static_cast<int>(std::ceil((y_max - model_.b) / quad_.panel_width)));
    return gl_integrate([&](double u) { return std::exp(-vphi * u) * wx.Wprime(u - z); },
                        model_.b, y_max, quad_.order, panels);
}

IdentityValue IdentityContext::resolvent_density_inf(double q, double x, double z) const {
    if (q < 0.0) throw std::domain_error("resolvent_density_inf: q must be >= 0");
    if (z < 0.0) throw std::domain_error("resolvent_density_inf: z must be >= 0");
    const double b = model_.b;
    if (q == 0.0) {
        const double drift_y = model_.net_drift().second;
        if (drift_y <= 0.0)
            return IdentityValue::infinite("q = 0 and psi_Y'(0+) <= 0: the measure is infinite");
        if (!(model_.delta > 0.0))
            throw std::domain_error("resolvent_density_inf: q = 0 form requires delta > 0");
        const ScaleEvaluator& wx = evaluator(ScaleTarget::X, 0.0);
        double numerator = 0.0;
        if (z > b) {
            numerator = 1.0;
        } else if (z > 0.0 && z < b) {
            numerator = 1.0 - wx.W(b - z) / model_.delta;
        }
        return IdentityValue::finite(numerator / drift_y - kernel_w(0.0, x, z));
    }
    const double denom = model_.delta * q * tail_integral_W(q);
    const double vphi = model_.varphi(q);
    double numerator = 0.0;
    if (z > b) {
        numerator = std::exp(-vphi * z);
    } else if (z > 0.0 && z < b) {
        numerator = model_.delta * tail_integral_Wprime(q, z);
    }
    return IdentityValue::finite(numerator / denom * r(q, x) - kernel_w(q, x, z));
}

double IdentityContext::one_sided_exit(double q, double x, double a) const {
    if (q < 0.0) throw std::domain_error("one_sided_exit: q must be >= 0");
    if (!(x <= a)) throw std::domain_error("one_sided_exit: requires x <= a");
    if (q == 0.0) return 1.0;
    return r(q, x) / r(q, a);
}

double IdentityContext::dividends_npv(double q, double x, double a) const {
    if (!(x <= a)) throw std::domain_error("dividends_npv: requires x <= a");
    if (model_.delta == 0.0) return 0.0;
    const ScaleEvaluator& wy = evaluator(ScaleTarget::Y, q);
    const double b = model_.b;
    return model_.delta * wy.Wbar(a - b) * r(q, x) / r(q, a) - model_.delta * wy.Wbar(x - b);
}

IdentityValue IdentityContext::dividends_npv_inf(double q, double x) const {
    if (q == 0.0) return IdentityValue::infinite("q = 0");
    if (q < 0.0) throw std::domain_error("dividends_npv_inf: q must be >= 0");
    if (model_.delta == 0.0) return IdentityValue::finite(0.0);  // L is identically zero
    const double vphi = model_.varphi(q);
    const ScaleEvaluator& wy = evaluator(ScaleTarget::Y, q);
    const double value = std::exp(-vphi * model_.b) * r(q, x) / (vphi * q * tail_integral_W(q)) -
                         model_.delta * wy.Wbar(x - model_.b);
    return IdentityValue::finite(value);
}

double IdentityContext::capital_injection_npv(double q, double x, double a) const {
    if (!(q > 0.0)) throw std::domain_error("capital_injection_npv: q must be > 0");
    if (!(x <= a)) throw std::domain_error("capital_injection_npv: requires x <= a");
    return r_tilde(q, a) * r(q, x) / r(q, a) - r_tilde(q, x);
}

double IdentityContext::capital_injection_npv_inf(double q, double x) const {
    if (!(q > 0.0)) throw std::domain_error("capital_injection_npv_inf: q must be > 0");
    if (model_.delta == 0.0) {
        // a -> infinity limit of r_tilde(a)/r(a) for the purely reflected
        // process: (Zbar(a) + psi'(0+)/q) / Z(a) -> 1/Phi(q).
        const ScaleEvaluator& wx = evaluator(ScaleTarget::X, q);
        return wx.Z(x) / model_.phi(q) - r_tilde(q, x);
    }
    const double vphi = model_.varphi(q);
    const double b = model_.b;
    const double y_max = infinite_horizon_cutoff(q);
    const ScaleEvaluator& wx = evaluator(ScaleTarget::X, q);
    wx.ensure_cache(y_max);
    const int panels = std::max(quad_.min_panels,
                                static_cast<int>(std::ceil((y_max - b) / quad_.panel_width)));
    const double num = gl_integrate(
        [&](double y) { return std::exp(-vphi * (y - b)) * wx.Z(y); }, b, y_max, quad_.order,
        panels);
    const double den = gl_integrate(
        [&](double y) { return std::exp(-vphi * (y - b)) * wx.W(y); }, b, y_max, quad_.order,
        panels);
    return num * r(q, x) / (q * den) - r_tilde(q, x);
}

double IdentityContext::occupation_R(double p, double q, double x) const {
    if (p < 0.0 || p + q < 0.0) throw std::domain_error("occupation_R: requires p >= 0, p + q >= 0");
    const ScaleEvaluator& wx = evaluator(ScaleTarget::X, p + q);
    const ScaleEvaluator& wy = evaluator(ScaleTarget::Y, p);
    double value = wx.Z(x) - q * wy.Wbar(x - model_.b);
    if (x > model_.b) {
        value -= (p + q) * convolve(
                              p,
                              [&](double y) {
                                  return q * wx.Wbar(y) - model_.delta * wx.W(y);
                              },
                              x);
    }
    return value;
}

double IdentityContext::occupation_L(double p, double q, double x) const {
    return occupation_R(p + q, -q, x);
}

double IdentityContext::occupation_L_expanded(double p, double q, double x) const {
    if (p < 0.0 || p + q < 0.0)
        throw std::domain_error("occupation_L_expanded: requires p >= 0, p + q >= 0");
    const ScaleEvaluator& wp = evaluator(ScaleTarget::X, p);
    const ScaleEvaluator& wy = evaluator(ScaleTarget::Y, p + q);
    double value = wp.Z(x) + q * wy.Wbar(x - model_.b);
    if (x > model_.b) {
        value += p * convolve(
                         p + q,
                         [&](double y) {
                             return q * wp.Wbar(y) + model_.delta * wp.W(y);
                         },
                         x);
    }
    return value;
}

double IdentityContext::occupation_below_lt(double p, double q, double x, double a) const {
    if (p < 0.0 || q < -p) throw std::domain_error("occupation_below_lt: requires p >= 0, q >= -p");
    if (!(a > 0.0) || !(x <= a))
        throw std::domain_error("occupation_below_lt: requires a > 0 and x <= a");
    return occupation_R(p, q, x) / occupation_R(p, q, a);
}

double IdentityContext::occupation_above_lt(double p, double q, double x, double a) const {
    if (p < 0.0 || q < -p) throw std::domain_error("occupation_above_lt: requires p >= 0, q >= -p");
    if (!(a > 0.0) || !(x <= a))
        throw std::domain_error("occupation_above_lt: requires a > 0 and x <= a");
    return occupation_L(p, q, x) / occupation_L(p, q, a);
}

const std::vector<std::string>& identity_quantity_names() {
    static const std::vector<std::string> names = {
        "r_q",
        "r_tilde_q",
        "w_kernel",
        "resolvent_density",
        "resolvent_density_inf",
        "resolvent_band_mass",
        "one_sided_exit",
        "dividends_npv",
        "dividends_npv_inf",
        "capital_injection_npv",
        "capital_injection_npv_inf",
        "mathcal_R",
        "mathcal_L",
        "occupation_below_lt",
        "occupation_above_lt",
    };
    return names;
}

namespace {

double require(const std::optional<double>& v, const char* name, const std::string& quantity) {
    if (!v) {
        std::ostringstream msg;
        msg << "identity '" << quantity << "': missing parameter '" << name << "'";
        throw std::invalid_argument(msg.str());
    }
    return *v;
}

}  // namespace

IdentityValue evaluate_identity(const IdentityContext& ctx, const IdentityRequest& req) {
    const std::string& name = req.quantity;
    auto x = [&] { return require(req.x, "x", name); };
    auto a = [&] { return require(req.a, "a", name); };
    auto z = [&] { return require(req.z, "z", name); };
    auto p = [&] { return require(req.p, "p", name); };
    auto q = [&] { return require(req.q, "q", name); };

    IdentityValue out;
    if (name == "r_q") {
        out = IdentityValue::finite(ctx.r(q(), x()));
    } else if (name == "r_tilde_q") {
        out = IdentityValue::finite(ctx.r_tilde(q(), x()));
    } else if (name == "w_kernel") {
        out = IdentityValue::finite(ctx.kernel_w(q(), x(), z()));
    } else if (name == "resolvent_density") {
        out = IdentityValue::finite(ctx.resolvent_density(q(), x(), a(), z()));
    } else if (name == "resolvent_density_inf") {
        out = ctx.resolvent_density_inf(q(), x(), z());
    } else if (name == "resolvent_band_mass") {
        out = IdentityValue::finite(
            ctx.resolvent_band_mass(q(), x(), a(), z(), require(req.z2, "z2", name)));
    } else if (name == "one_sided_exit") {
        out = IdentityValue::finite(ctx.one_sided_exit(q(), x(), a()));
    } else if (name == "dividends_npv") {
        out = IdentityValue::finite(ctx.dividends_npv(q(), x(), a()));
    } else if (name == "dividends_npv_inf") {
        out = ctx.dividends_npv_inf(q(), x());
    } else if (name == "capital_injection_npv") {
        out = IdentityValue::finite(ctx.capital_injection_npv(q(), x(), a()));
    } else if (name == "capital_injection_npv_inf") {
        out = IdentityValue::finite(ctx.capital_injection_npv_inf(q(), x()));
    } else if (name == "mathcal_R") {
        out = IdentityValue::finite(ctx.occupation_R(p(), q(), x()));
    } else if (name == "mathcal_L") {
        out = IdentityValue::finite(ctx.occupation_L(p(), q(), x()));
    } else if (name == "occupation_below_lt") {
        out = IdentityValue::finite(ctx.occupation_below_lt(p(), q(), x(), a()));
    } else if (name == "occupation_above_lt") {
        out = IdentityValue::finite(ctx.occupation_above_lt(p(), q(), x(), a()));
    } else {
        std::ostringstream msg;
        msg << "unknown identity quantity '" << name << "'; valid names:";
        for (const auto& n : identity_quantity_names()) msg << ' ' << n;
        throw std::invalid_argument(msg.str());
    }
    if (out.method.empty() && !out.is_infinite) {
        const double qq = req.q.value_or(0.0);
        const double pp = req.p.value_or(0.0);
        const double key = (name == "mathcal_R" || name == "mathcal_L" ||
                            name == "occupation_below_lt" || name == "occupation_above_lt")
                               ? pp + qq
                               : qq;
        out.method = ctx.evaluator(ScaleTarget::X, std::max(key, 0.0)).backend_name();
    }
    return out;
}

}  // namespace rrlevy
