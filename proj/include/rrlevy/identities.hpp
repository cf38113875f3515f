#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rrlevy/model.hpp"
#include "rrlevy/scale.hpp"

namespace rrlevy {

/// Quadrature settings shared by every convolution integral.
struct QuadratureSettings {
    int order = 16;
    double panel_width = 0.05;
    int min_panels = 8;
    /// Debug mode: re-evaluate every convolution with doubled panels and
    /// fail loudly when the two disagree beyond self_check_tol.
    bool self_check = false;
    double self_check_tol = 1e-8;
};

/// Result of an identity evaluation. Quantities that are infinite as a
/// statement of the theory (never as floating-point overflow) carry the
/// distinguished flag and a reason instead of a value.
struct IdentityValue {
    double value = 0.0;
    bool is_infinite = false;
    std::string reason;
    std::string method;

    static IdentityValue finite(double v, std::string m = {}) {
        return IdentityValue{v, false, {}, std::move(m)};
    }
    static IdentityValue infinite(std::string why) {
        return IdentityValue{0.0, true, std::move(why), {}};
    }
};

/// Shared evaluator pool for one model: scale evaluators for X and Y are
/// built on demand, cached per q, and reused across identity calls.
/// After warm-up the context is immutable and safe to share across threads.
class IdentityContext {
public:
    explicit IdentityContext(const ModelSpec& model, QuadratureSettings quad = {});

    const ModelSpec& model() const { return model_; }
    const QuadratureSettings& quadrature() const { return quad_; }

    const ScaleEvaluator& evaluator(ScaleTarget target, double q) const;

    /// Composite Gauss-Legendre of WY_kernel_q(x - y) * f(y) over [b, x].
    /// Empty (0) for x <= b.
    double convolve(double kernel_q, const std::function<double(double)>& f, double x) const;

    /// r^(q): Z^(q)(x) + q delta int_b^x WY^(q)(x-y) W^(q)(y) dy.
    double r(double q, double x) const;
    /// r~^(q): Zbar^(q)(x) + psi'(0+)/q + delta int_b^x WY^(q)(x-y) Z^(q)(y) dy.
    double r_tilde(double q, double x) const;

    /// Resolvent kernel w^(q)(x, z); zero at z in {0, b} and outside
    /// (0,b) u (b,x).
    double kernel_w(double q, double x, double z) const;

    /// Density of the expected discounted occupation measure of V before
    /// T_a^+. Nonnegative up to quadrature noise (checked).
    double resolvent_density(double q, double x, double a, double z) const;

    /// Mass of the resolvent measure on the band [z1, z2] inside [0, a].
    double resolvent_band_mass(double q, double x, double a, double z1, double z2) const;

    /// Infinite-horizon resolvent density. Returns the distinguished
    /// infinite value when q = 0 and psi_Y'(0+) <= 0.
    IdentityValue resolvent_density_inf(double q, double x, double z) const;

    /// E_x[e^{-q T_a^+}] = r^(q)(x) / r^(q)(a).
    double one_sided_exit(double q, double x, double a) const;

    double dividends_npv(double q, double x, double a) const;
    IdentityValue dividends_npv_inf(double q, double x) const;

    double capital_injection_npv(double q, double x, double a) const;
    double capital_injection_npv_inf(double q, double x) const;

    /// Occupation-time kernels; R is defined for p >= 0, p + q >= 0 and L
    /// delegates to R^(p+q, -q).
    double occupation_R(double p, double q, double x) const;
    double occupation_L(double p, double q, double x) const;
    /// Expanded display of L, kept as an independent route for testing.
    double occupation_L_expanded(double p, double q, double x) const;

    double occupation_below_lt(double p, double q, double x, double a) const;
    double occupation_above_lt(double p, double q, double x, double a) const;

    /// Tail integrals int_b^{y_max} e^{-varphi(q) y} f(y) dy with the
    /// truncation rule y_max = b + 40 / (varphi(q) - Phi(q)).
    double tail_integral_W(double q) const;
    double tail_integral_Wprime(double q, double z) const;

private:
    double infinite_horizon_cutoff(double q) const;

    ModelSpec model_;
    QuadratureSettings quad_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, double>, std::shared_ptr<const ScaleEvaluator>> evaluators_;
};

/// A named identity request as read from batch request files.
struct IdentityRequest {
    std::string quantity;
    std::optional<double> x, a, z, z2, p, q;
};

/// All quantity names accepted by evaluate_identity.
const std::vector<std::string>& identity_quantity_names();

/// Dispatches a request by name; throws std::invalid_argument on unknown
/// names or missing parameters.
IdentityValue evaluate_identity(const IdentityContext& ctx, const IdentityRequest& request);

}  // namespace rrlevy
