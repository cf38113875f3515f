#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrlevy/model.hpp"
#include "rrlevy/rng.hpp"

namespace rrlevy {

enum class SimScheme { ExactBV, EulerApprox };

struct SimConfig {
    double x0 = 0.0;
    double a = 1.0;
    double q = 0.0;  // discount rate for L, R and the exit transform
    double p = 0.0;  // rate applied to T_a^+ in the occupation weights
    std::uint64_t n_paths = 1;
    std::uint64_t seed = 0;
    SimScheme scheme = SimScheme::ExactBV;
    double step = 1e-3;  // Euler grid step
    double horizon_cap = 1e4;
    std::optional<std::pair<double, double>> band;  // resolvent band [z1, z2]
    int threads = 0;  // 0 = hardware concurrency

    void validate(const ModelSpec& model) const;
};

/// Functionals of one path, all accumulated up to T_a^+ (or the horizon
/// cap, in which case `censored` is set and t_up is the cap).
struct PathFunctionals {
    double t_up = 0.0;
    double disc_L = 0.0;      // int e^{-qt} dL
    double disc_R = 0.0;      // int e^{-qt} dR over [0, T]
    double occ_below = 0.0;   // time with V < b
    double occ_above = 0.0;   // time with V > b
    double band_mass = 0.0;   // int e^{-qt} 1{V in band} dt
    bool censored = false;
};

struct Estimate {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_of_mean = 0.0;
};

/// Ensemble summary: named estimates plus the censoring count. The
/// reduction order is fixed by path index, so a given (seed, config) is
/// bitwise reproducible for any thread count.
struct EstimateSet {
    std::map<std::string, Estimate> estimates;
    std::uint64_t n_paths = 0;
    std::uint64_t n_censored = 0;

    const Estimate& at(const std::string& name) const { return estimates.at(name); }
};

PathFunctionals simulate_path_exact_bv(const ModelSpec& model, const SimConfig& config,
                                       CounterRng& rng);
PathFunctionals simulate_path_euler(const ModelSpec& model, const SimConfig& config,
                                    CounterRng& rng);

/// One recorded path event: V, cumulative L and R, and the underlying
/// Levy value x at time t (so V = x + R - L can be checked directly).
struct PathEvent {
    double t, v, l, r, x;
    const char* event;
};
using PathObserver = std::function<void(const PathEvent&)>;

/// ExactBV path with an observer invoked at every event epoch.
PathFunctionals simulate_path_exact_bv_observed(const ModelSpec& model, const SimConfig& config,
                                                CounterRng& rng, const PathObserver& observer);

/// Runs n_paths independent streams and reduces them blockwise in index
/// order. Estimated functionals: exit_lt = e^{-q T}, disc_L, disc_R,
/// occ_below_lt = e^{-p T - q occ_below}, occ_above_lt likewise,
/// band_mass, t_up.
EstimateSet run_ensemble(const ModelSpec& model, const SimConfig& config);

/// Writes "t,V,L,R,event" rows for the first path of the stream (ExactBV
/// event epochs; Euler records every k-th grid point to stay bounded).
void write_trace_csv(const ModelSpec& model, const SimConfig& config, int n_paths_to_trace,
                     std::ostream& os);

}  // namespace rrlevy
