#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rrlevy/identities.hpp"
#include "rrlevy/model.hpp"
#include "rrlevy/simulate.hpp"

namespace rrlevy {

/// One cross-check: formula route vs independent route. Analytic checks
/// pass on rel_err <= tolerance; Monte Carlo checks pass on |z| <= 3.
struct VerificationReport {
    std::string name;
    std::string inputs;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    bool is_mc = false;
    double z_score = 0.0;
    double stderr_of_mean = 0.0;
    std::uint64_t n_paths = 0;
    std::string note;
};

/// Both scale-function relation equalities between the X and Y families,
/// checked by quadrature on each grid point. Tolerance 1e-6.
std::vector<VerificationReport> check_levy_convolution_identities(const ModelSpec& model, double p,
                                                                  double q,
                                                                  const std::vector<double>& x_grid);

/// The three jump-measure double-integral identities (bounded variation
/// only): the left sides integrate the jump measure directly, the right
/// sides come from scale-function expressions. Tolerance 1e-4.
std::vector<VerificationReport> check_lemma_pi_identities(const ModelSpec& model, double p, double q,
                                                          double v, double x);

/// Finite-difference consistency of the drift sensitivity of identity
/// (iii); both sides must shift identically (to 1e-3) under drift + eps.
VerificationReport check_lemma_drift_sensitivity(const ModelSpec& model, double p, double q,
                                                 double v, double x);

/// E_x[e^{-p tau_b^-} Z^(p+q)(Y_{tau_b^-}) 1{tau_b^- < tau_a^+}] via the
/// jump-measure route vs the occupation-kernel expression. Tolerance 1e-4.
VerificationReport check_renaud_expectation(const ModelSpec& model, double p, double q, double x,
                                            double a);

struct McCheckParams {
    std::string quantity;  // one_sided_exit, dividends_npv, capital_injection_npv,
                           // occupation_below_lt, occupation_above_lt, resolvent_band
    double x = 0.0;
    double a = 1.0;
    double p = 0.0;
    double q = 0.0;
    std::uint64_t n_paths = 100000;
    std::uint64_t seed = 20240608;
    SimScheme scheme = SimScheme::ExactBV;
    double step = 1e-3;
    double horizon_cap = 1e4;
    std::optional<std::pair<double, double>> band;
    int threads = 0;
};

/// Monte Carlo vs formula z-score checks; ensembles are shared between
/// entries with identical configurations.
std::vector<VerificationReport> check_mc_suite(const ModelSpec& model,
                                               const std::vector<McCheckParams>& params);

struct SuiteOptions {
    std::uint64_t seed = 20240608;
    std::optional<std::uint64_t> n_paths;
    int threads = 0;
};

const std::vector<std::string>& verification_suite_names();

/// Runs a named suite: analytic, lemma_pi, degeneracy, mc_small, mc_full.
std::vector<VerificationReport> run_suite(const ModelSpec& model, const std::string& suite,
                                          const SuiteOptions& options = {});

bool all_passed(const std::vector<VerificationReport>& reports);

}  // namespace rrlevy
