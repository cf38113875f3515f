#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rrlevy/model.hpp"

namespace rrlevy {

enum class ScaleTarget { X, Y };

/// Evaluates the q-scale function W of the chosen process (X, or the
/// drift-changed Y) together with its integral Wbar, right derivative,
/// and the companions Z = 1 + q*Wbar and Zbar.
///
/// The rational Laplace transform 1/(psi_target - q) admits a partial
/// fraction expansion with simple real poles for this jump family, giving
/// an exact exponential-sum backend. When the poles are too close to
/// separate reliably the evaluator falls back to numerical inversion of
/// the transform (fixed-Talbot contour) on a uniform grid cache.
class ScaleEvaluator {
public:
    static constexpr double kRepeatedRootTol = 1e-9;
    static constexpr int kTalbotNodes = 64;
    static constexpr double kCacheStep = 1e-3;

    static ScaleEvaluator build(const ModelSpec& model, double q, ScaleTarget target);

    double W(double x) const;
    double Wprime(double x) const;
    double Wbar(double x) const;
    double Z(double x) const;
    double Zbar(double x) const;

    /// W(0+): 1/c for bounded variation, 0 otherwise.
    double boundary_value() const;
    /// Phi(q) for X, varphi(q) for Y: the exponential growth rate of W.
    double growth_rate() const { return growth_rate_; }

    bool closed_form() const { return closed_form_; }
    /// Set when partial fractions were rejected (repeated or missing roots).
    bool inversion_fallback() const { return inversion_fallback_; }
    const std::string& backend_note() const { return backend_note_; }
    std::string backend_name() const { return closed_form_ ? "closed_form" : "talbot_inversion"; }

    const ModelSpec& model() const { return model_; }
    double q() const { return q_; }
    ScaleTarget target() const { return target_; }

    /// Closed-form exponents and coefficients (empty for the inversion
    /// backend): W(x) = sum_j coefficients[j] * exp(exponents[j] * x).
    const std::vector<double>& exponents() const { return exponents_; }
    const std::vector<double>& coefficients() const { return coefficients_; }

    /// Extends the inversion cache so later reads up to x_max are lock-free
    /// snapshots. No-op for the closed-form backend.
    void ensure_cache(double x_max) const;

    /// Writes rows "x,W,Z" with 17 significant digits.
    void dump_csv(std::ostream& os, double x_max, double step) const;

private:
    struct Cache {
        double h = kCacheStep;
        std::vector<double> w;
        std::vector<double> wbar;
        std::vector<double> zbar;
        std::vector<double> wprime;
        double x_max() const { return h * static_cast<double>(w.size() - 1); }
    };

    // Mutex-guarded cache slot, heap-held so evaluators stay copyable;
    // copies share the cache.
    struct CacheState {
        std::mutex mutex;
        std::shared_ptr<const Cache> cache;
    };

    ScaleEvaluator(const ModelSpec& model, double q, ScaleTarget target);

    double effective_drift() const;
    std::shared_ptr<const Cache> cache_snapshot(double x_needed) const;
    std::shared_ptr<Cache> build_cache(double x_max) const;

    ModelSpec model_;
    double q_ = 0.0;
    ScaleTarget target_ = ScaleTarget::X;
    double growth_rate_ = 0.0;
    bool closed_form_ = true;
    bool inversion_fallback_ = false;
    std::string backend_note_;

    std::vector<double> exponents_;
    std::vector<double> coefficients_;

    std::shared_ptr<CacheState> cache_state_;
};

/// Direct fixed-Talbot inversion of 1/(psi_target - q) at x > 0, evaluated
/// in extended precision with the growth rate tilted out of the transform.
double invert_laplace(const ModelSpec& model, double q, ScaleTarget target, double x);

}  // namespace rrlevy
