#pragma once

#include <complex>
#include <string>
#include <vector>

namespace rrlevy {

/// One downward compound-Poisson component: jumps arrive at `rate` and are
/// exponentially distributed with parameter `exp_rate` (mean 1/exp_rate).
struct JumpComponent {
    double rate = 0.0;
    double exp_rate = 0.0;
};

enum class PathVariation { BoundedVariation, UnboundedVariation };

/// Spectrally negative Levy process with Gaussian part sigma, natural drift,
/// hyperexponential downward jumps, plus the refraction pair (delta, b):
/// above level b a linear drift at rate delta is subtracted; at 0 the
/// process is reflected upward.
struct ModelSpec {
    double sigma = 0.0;
    double drift = 0.0;
    std::vector<JumpComponent> jumps;
    double delta = 0.0;
    double b = 1.0;

    /// Throws std::invalid_argument on any violated constraint, including
    /// condition (H): delta < drift when sigma = 0.
    void validate() const;

    PathVariation classify() const {
        return sigma == 0.0 ? PathVariation::BoundedVariation : PathVariation::UnboundedVariation;
    }

    double total_jump_rate() const;

    /// Laplace exponent of X; theta >= 0.
    double psi(double theta) const;
    /// Laplace exponent of Y = X - delta t; theta >= 0.
    double psi_y(double theta) const;

    /// Complex continuations used by the numerical Laplace inversion.
    std::complex<long double> psi_complex(std::complex<long double> theta) const;
    std::complex<long double> psi_y_complex(std::complex<long double> theta) const;

    /// Right inverses: largest nonnegative roots of psi = q and psi_y = q.
    double phi(double q) const;
    double varphi(double q) const;

    /// (psi'(0+), psi_y'(0+)); finite for this jump family.
    std::pair<double, double> net_drift() const;

    double psi_prime(double theta) const;
    double psi_y_prime(double theta) const { return psi_prime(theta) - delta; }
};

}  // namespace rrlevy
