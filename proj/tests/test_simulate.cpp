#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "rrlevy/identities.hpp"
#include "rrlevy/simulate.hpp"
#include "test_common.hpp"

using namespace rrlevy;
using namespace testmodels;

namespace {

SimConfig base_config() {
    SimConfig config;
    config.x0 = 1.0;
    config.a = 2.0;
    config.q = 0.5;
    config.p = 0.3;
    config.n_paths = 50000;
    config.seed = 42;
    config.scheme = SimScheme::ExactBV;
    config.band = std::make_pair(1.2, 1.8);
    return config;
}

}  // namespace

TEST_CASE("drift-only travel time is deterministic") {
    const ModelSpec m = m_drift_only();
    SimConfig config = base_config();
    config.x0 = 0.0;
    config.n_paths = 16;
    const EstimateSet est = run_ensemble(m, config);
    // 1/c below b plus 1/(c - delta) above b
    const double expected = 1.0 / 1.5 + 1.0 / 1.25;
    CHECK(est.at("t_up").mean == doctest::Approx(expected).epsilon(1e-12));
    CHECK(est.at("t_up").stddev == 0.0);
    CHECK(est.at("disc_R").mean == 0.0);
    CHECK(est.n_censored == 0);
}

TEST_CASE("starting at or above the target exits immediately") {
    CounterRng rng(1, 0);
    SimConfig config = base_config();
    config.x0 = 2.0;
    PathFunctionals f = simulate_path_exact_bv(m1(), config, rng);
    CHECK(f.t_up == 0.0);
    CHECK(f.disc_L == 0.0);
    CHECK(f.disc_R == 0.0);
    CHECK(f.occ_below == 0.0);
    CHECK(f.occ_above == 0.0);

    config.x0 = 5.0;
    f = simulate_path_exact_bv(m1(), config, rng);
    CHECK(f.t_up == 0.0);
}

TEST_CASE("negative start injects the deficit at time zero") {
    CounterRng rng(1, 0);
    SimConfig config = base_config();
    config.x0 = -0.75;
    const PathFunctionals f = simulate_path_exact_bv(m_drift_only(), config, rng);
    CHECK(f.disc_R == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("pathwise decomposition V = x0 + X + R - L at event epochs") {
    SimConfig config = base_config();
    config.x0 = 0.5;
    double worst = 0.0;
    for (std::uint64_t path = 0; path < 200; ++path) {
        CounterRng rng(config.seed, path);
        simulate_path_exact_bv_observed(m1(), config, rng, [&](const PathEvent& ev) {
            const double scale = std::max({1.0, std::fabs(ev.x), ev.l, ev.r});
            worst = std::max(worst, std::fabs(ev.v - (ev.x + ev.r - ev.l)) / scale);
            CHECK(ev.v >= 0.0);
        });
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("exact scheme keeps L equal to delta times time above b") {
    SimConfig config = base_config();
    config.q = 0.0;  // undiscounted: disc_L must equal delta * occ_above
    for (std::uint64_t path = 0; path < 200; ++path) {
        CounterRng rng(7, path);
        const PathFunctionals f = simulate_path_exact_bv(m1(), config, rng);
        CHECK(f.disc_L == doctest::Approx(m1().delta * f.occ_above).epsilon(1e-12));
        CHECK(f.occ_below + f.occ_above == doctest::Approx(f.t_up).epsilon(1e-12));
    }
}

TEST_CASE("ensemble is bitwise reproducible across thread counts") {
    SimConfig config = base_config();
    config.n_paths = 20000;
    config.threads = 1;
    const EstimateSet one = run_ensemble(m1(), config);
    config.threads = 4;
    const EstimateSet four = run_ensemble(m1(), config);
    for (const auto& [name, est] : one.estimates) {
        CHECK(std::memcmp(&est.mean, &four.at(name).mean, sizeof(double)) == 0);
        CHECK(std::memcmp(&est.stddev, &four.at(name).stddev, sizeof(double)) == 0);
    }
    const EstimateSet again = run_ensemble(m1(), config);
    CHECK(std::memcmp(&again.at("exit_lt").mean, &one.at("exit_lt").mean, sizeof(double)) == 0);
}

TEST_CASE("degenerate discounting gives unit weights with zero spread") {
    SimConfig config = base_config();
    config.q = 0.0;
    config.p = 0.0;
    config.n_paths = 5000;
    const EstimateSet est = run_ensemble(m1(), config);
    CHECK(est.at("exit_lt").mean == 1.0);
    CHECK(est.at("exit_lt").stddev == 0.0);
    CHECK(est.at("occ_below_lt").mean == 1.0);
}

TEST_CASE("exact scheme matches the exit formula within three sigma") {
    SimConfig config = base_config();
    config.n_paths = 200000;
    const EstimateSet est = run_ensemble(m1(), config);
    IdentityContext ctx(m1());
    const double formula = ctx.one_sided_exit(0.5, 1.0, 2.0);
    const Estimate& e = est.at("exit_lt");
    const double z = (e.mean - formula) / e.stderr_of_mean;
    CHECK(std::fabs(z) <= 3.0);
    CHECK(est.n_censored == 0);
}

TEST_CASE("euler converges to the exact scheme as the step shrinks") {
    // sigma = 0 model: the exact scheme is the bias-free reference.
    SimConfig exact_config = base_config();
    exact_config.n_paths = 60000;
    const EstimateSet exact = run_ensemble(m1(), exact_config);

    SimConfig euler_config = exact_config;
    euler_config.scheme = SimScheme::EulerApprox;
    double prev_gap = 1e9;
    double final_stderr = 0.0;
    for (double h : {1e-1, 1e-2, 1e-3}) {
        euler_config.step = h;
        const EstimateSet est = run_ensemble(m1(), euler_config);
        const double gap = std::fabs(est.at("exit_lt").mean - exact.at("exit_lt").mean);
        CHECK(gap < prev_gap + 2e-3);  // decreasing up to MC noise
        prev_gap = gap;
        final_stderr = est.at("exit_lt").stderr_of_mean;
    }
    const double combined =
        std::sqrt(final_stderr * final_stderr +
                  exact.at("exit_lt").stderr_of_mean * exact.at("exit_lt").stderr_of_mean);
    CHECK(prev_gap <= 3.0 * combined + 1e-3);
}

TEST_CASE("reflected brownian motion matches the Z ratio") {
    // delta = 0, no jumps, sigma = 1: V is X reflected at 0 and
    // E e^{-q T_a^+} = Z(x)/Z(a).
    ModelSpec m;
    m.sigma = 1.0;
    m.drift = 0.0;
    m.delta = 0.0;
    m.b = 0.5;
    SimConfig config;
    config.x0 = 0.0;
    config.a = 1.0;
    config.q = 0.5;
    config.n_paths = 30000;
    config.seed = 11;
    config.scheme = SimScheme::EulerApprox;

    const ScaleEvaluator wx = ScaleEvaluator::build(m, 0.5, ScaleTarget::X);
    const double formula = wx.Z(0.0) / wx.Z(1.0);

    // The grid check sees the barrier late, giving a bias of order
    // 0.58 sigma sqrt(h); it must shrink with the step and the finest level
    // must sit within noise plus that scale.
    double gap = 0.0, noise = 0.0, step_scale = 0.0;
    double prev_gap = 1e9;
    for (double h : {4e-3, 1e-3, 2.5e-4}) {
        config.step = h;
        const EstimateSet est = run_ensemble(m, config);
        const Estimate& e = est.at("exit_lt");
        gap = std::fabs(e.mean - formula);
        noise = e.stderr_of_mean;
        step_scale = 0.6 * m.sigma * std::sqrt(h);
        CHECK(gap < prev_gap + 3.0 * noise);
        prev_gap = gap;
    }
    CHECK(gap <= 3.0 * noise + 1.5 * step_scale);
}

TEST_CASE("horizon cap censors and flags") {
    ModelSpec slow = m_drift_only();
    SimConfig config = base_config();
    config.x0 = 0.0;
    config.a = 100.0;  // unreachable within the cap
    config.horizon_cap = 5.0;
    config.n_paths = 50;
    const EstimateSet est = run_ensemble(slow, config);
    CHECK(est.n_censored == 50);
}

TEST_CASE("config validation") {
    SimConfig config = base_config();
    config.scheme = SimScheme::EulerApprox;
    config.step = 0.0;
    CHECK_THROWS_AS(config.validate(m1()), std::domain_error);

    config = base_config();
    CHECK_THROWS_AS(config.validate(m1_sigma()), std::invalid_argument);  // ExactBV needs sigma=0

    config = base_config();
    config.a = -1.0;
    CHECK_THROWS_AS(config.validate(m1()), std::invalid_argument);

    CounterRng rng(0, 0);
    SimConfig bad = base_config();
    bad.step = -1.0;
    CHECK_THROWS_AS(simulate_path_euler(m1(), bad, rng), std::domain_error);
}

TEST_CASE("trace output contains events and headers") {
    SimConfig config = base_config();
    config.n_paths = 4;
    std::ostringstream os;
    write_trace_csv(m1(), config, 2, os);
    const std::string out = os.str();
    CHECK(out.find("path,t,V,L,R,event") == 0);
    CHECK(out.find("start") != std::string::npos);
    CHECK(out.find("exit") != std::string::npos);
}
