#include "rrlevy/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rrlevy/numerics.hpp"

namespace rrlevy {

void ModelSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and >= 0");
    if (!std::isfinite(drift)) throw std::invalid_argument("drift must be finite");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be finite and >= 0");
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("b must be finite and > 0");
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        if (!(jumps[i].rate > 0.0) || !std::isfinite(jumps[i].rate)) {
            std::ostringstream msg;
            msg << "jumps[" << i << "].rate must be finite and > 0";
            throw std::invalid_argument(msg.str());
        }
        if (!(jumps[i].exp_rate > 0.0) || !std::isfinite(jumps[i].exp_rate)) {
            std::ostringstream msg;
            msg << "jumps[" << i << "].exp_rate must be finite and > 0";
            throw std::invalid_argument(msg.str());
        }
    }
    if (sigma == 0.0) {
        // Bounded variation: the drift c must be positive (X is not the
        // negative of a subordinator) and condition (H) requires delta < c.
        if (!(drift > 0.0)) throw std::invalid_argument("bounded variation (sigma = 0) requires drift > 0");
        if (!(delta < drift))
            throw std::invalid_argument("condition (H) violated: delta must be < drift when sigma = 0");
    }
}

double ModelSpec::total_jump_rate() const {
    double acc = 0.0;
    for (const auto& j : jumps) acc += j.rate;
    return acc;
}

double ModelSpec::psi(double theta) const {
    if (theta < 0.0) throw std::domain_error("psi: theta must be >= 0");
    double acc = 0.5 * sigma * sigma * theta * theta + drift * theta;
    for (const auto& j : jumps) acc -= j.rate * theta / (j.exp_rate + theta);
    return acc;
}

double ModelSpec::psi_y(double theta) const {
    if (theta < 0.0) throw std::domain_error("psi_y: theta must be >= 0");
    return psi(theta) - delta * theta;
}

std::complex<long double> ModelSpec::psi_complex(std::complex<long double> theta) const {
    std::complex<long double> acc =
        0.5L * static_cast<long double>(sigma) * static_cast<long double>(sigma) * theta * theta +
        static_cast<long double>(drift) * theta;
    for (const auto& j : jumps) {
        acc -= static_cast<long double>(j.rate) * theta /
               (static_cast<long double>(j.exp_rate) + theta);
    }
    return acc;
}

std::complex<long double> ModelSpec::psi_y_complex(std::complex<long double> theta) const {
    return psi_complex(theta) - static_cast<long double>(delta) * theta;
}

double ModelSpec::psi_prime(double theta) const {
    double acc = sigma * sigma * theta + drift;
    for (const auto& j : jumps) {
        const double d = j.exp_rate + theta;
        acc -= j.rate * j.exp_rate / (d * d);
    }
    return acc;
}

std::pair<double, double> ModelSpec::net_drift() const {
    double p = drift;
    for (const auto& j : jumps) p -= j.rate / j.exp_rate;
    return {p, p - delta};
}

namespace {

double largest_root(const ModelSpec& model, double q, bool drift_changed) {
    if (q < 0.0) throw std::domain_error("phi/varphi: q must be >= 0");
    auto f = [&](double t) { return (drift_changed ? model.psi_y(t) : model.psi(t)) - q; };
    const double slope0 = drift_changed ? model.net_drift().second : model.net_drift().first;
    if (q == 0.0 && slope0 >= 0.0) return 0.0;

    // psi is strictly convex with psi(0) = 0, so for q > 0 (or q = 0 with
    // negative drift at the origin) the largest root sits right of any
    // point where f < 0. Start past the origin and expand.
    double start = q / std::max(slope0, 1e-6);
    if (!(start > 0.0) || !std::isfinite(start)) start = 1.0;
    double lo = 0.0;
    if (q == 0.0) {
        // skip the root at 0; move right until f < 0 (possible since
        // slope0 < 0 here), then bracket the strictly positive root.
        double probe = start;
        for (int k = 0; k < 200 && f(probe) >= 0.0; ++k) probe *= 0.5;
        lo = probe;
    }
    double value = find_root_expanding(f, lo, std::max(start, lo * 2 + 1e-6));
    const double residual = std::fabs((drift_changed ? model.psi_y(value) : model.psi(value)) - q);
    if (residual > 1e-10 * std::max(1.0, q)) {
        std::ostringstream msg;
        msg << (drift_changed ? "varphi" : "phi") << ": postcondition failed, |psi(root)-q| = " << residual;
        throw numeric_error(msg.str());
    }
    return value;
}

}  // namespace

double ModelSpec::phi(double q) const { return largest_root(*this, q, false); }

double ModelSpec::varphi(double q) const { return largest_root(*this, q, true); }

}  // namespace rrlevy
