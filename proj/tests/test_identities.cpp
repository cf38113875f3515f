#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rrlevy/identities.hpp"
#include "rrlevy/numerics.hpp"
#include "test_common.hpp"

using namespace rrlevy;
using namespace testmodels;

namespace {

IdentityContext& ctx_m1() {
    static IdentityContext ctx(m1());
    return ctx;
}

/// Same integral with twice the panel count; the self-convergence oracle.
double convolve_refined(const IdentityContext& ctx, double kernel_q,
                        const std::function<double(double)>& f, double x) {
    const double b = ctx.model().b;
    const ScaleEvaluator& wy = ctx.evaluator(ScaleTarget::Y, kernel_q);
    const int panels = 2 * std::max(8, static_cast<int>(std::ceil((x - b) / 0.05)));
    return gl_integrate([&](double y) { return wy.W(x - y) * f(y); }, b, x, 16, panels);
}

}  // namespace

TEST_CASE("convolution basics and self-convergence") {
    auto& ctx = ctx_m1();
    const ScaleEvaluator& wx = ctx.evaluator(ScaleTarget::X, 0.5);

    CHECK(ctx.convolve(0.5, [&](double y) { return wx.W(y); }, 1.0) == 0.0);  // x = b
    CHECK(ctx.convolve(0.5, [](double) { return 0.0; }, 2.0) == 0.0);

    const double coarse = ctx.convolve(0.5, [&](double y) { return wx.W(y); }, 2.0);
    const double fine = convolve_refined(ctx, 0.5, [&](double y) { return wx.W(y); }, 2.0);
    CHECK(coarse > 0.0);
    CHECK(coarse == doctest::Approx(fine).epsilon(1e-8));

    CHECK_THROWS_AS(
        ctx.convolve(0.5, [](double) { return std::numeric_limits<double>::quiet_NaN(); }, 2.0),
        numeric_error);

    // debug self-check accepts smooth integrands and rejects rough ones
    QuadratureSettings checked;
    checked.self_check = true;
    IdentityContext strict(m1(), checked);
    const ScaleEvaluator& wxs = strict.evaluator(ScaleTarget::X, 0.5);
    CHECK(strict.convolve(0.5, [&](double y) { return wxs.W(y); }, 2.0) ==
          doctest::Approx(coarse).epsilon(1e-10));
    CHECK_THROWS_AS(
        strict.convolve(0.5, [](double y) { return y < 1.497131 ? 0.0 : 17.0; }, 2.0),
        numeric_error);
}

TEST_CASE("composite r reduces correctly") {
    auto& ctx = ctx_m1();
    // q = 0: identically one
    for (double x : {-2.0, 0.0, 0.5, 1.0, 2.0, 4.0})
        CHECK(ctx.r(0.0, x) == doctest::Approx(1.0).epsilon(1e-12));
    // x <= 0: one for any q
    for (double x : {-3.0, -0.1, 0.0}) CHECK(ctx.r(0.5, x) == doctest::Approx(1.0).epsilon(1e-12));
    // x <= b: the convolution is empty, r = Z
    const ScaleEvaluator& wx = ctx.evaluator(ScaleTarget::X, 0.5);
    CHECK(ctx.r(0.5, 1.0) == doctest::Approx(wx.Z(1.0)).epsilon(1e-14));
    CHECK(ctx.r(0.5, 1.0) == doctest::Approx(1.5235109986964115).epsilon(1e-12));
    // frozen quadrature oracle at x = 2
    CHECK(ctx.r(0.5, 2.0) == doctest::Approx(2.9142924699869741).epsilon(1e-9));
    // delta = 0 collapses r to Z everywhere
    ModelSpec md0 = m1();
    md0.delta = 0.0;
    IdentityContext ctx0(md0);
    const ScaleEvaluator& wx0 = ctx0.evaluator(ScaleTarget::X, 0.5);
    for (double x : {0.5, 1.0, 1.7, 3.0})
        CHECK(ctx0.r(0.5, x) == doctest::Approx(wx0.Z(x)).epsilon(1e-12));
    // increasing in x
    double prev = 0.0;
    for (double x = -0.5; x <= 3.0; x += 0.25) {
        const double value = ctx.r(0.5, x);
        CHECK(value >= prev - 1e-13);
        prev = value;
    }
}

TEST_CASE("composite r_tilde values and domain") {
    auto& ctx = ctx_m1();
    CHECK(ctx.r_tilde(0.5, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ctx.r_tilde(0.5, -1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(ctx.r_tilde(0.5, 2.0) == doctest::Approx(4.8823879608276644).epsilon(1e-9));
    CHECK_THROWS_AS(ctx.r_tilde(0.0, 1.0), std::domain_error);
    // below b the convolution is empty
    const ScaleEvaluator& wx = ctx.evaluator(ScaleTarget::X, 0.5);
    CHECK(ctx.r_tilde(0.5, 0.7) == doctest::Approx(wx.Zbar(0.7) + 1.0).epsilon(1e-13));
}

TEST_CASE("resolvent kernel w") {
    auto& ctx = ctx_m1();
    // outside the support
    CHECK(ctx.kernel_w(0.5, 1.0, 3.0) == 0.0);
    CHECK(ctx.kernel_w(0.5, 2.0, 2.5) == 0.0);
    CHECK(ctx.kernel_w(0.5, 2.0, 0.0) == 0.0);
    CHECK(ctx.kernel_w(0.5, 2.0, 1.0) == 0.0);  // z = b convention
    CHECK_THROWS_AS(ctx.kernel_w(0.5, 2.0, -0.1), std::domain_error);

    // x <= b: plain W(x - z)
    const ScaleEvaluator& wx = ctx.evaluator(ScaleTarget::X, 0.5);
    CHECK(ctx.kernel_w(0.5, 0.8, 0.3) == doctest::Approx(wx.W(0.5)).epsilon(1e-13));

    // quadrature self-convergence for the refraction part at z < b < x
    const double z = 0.5, x = 2.0;
    const double direct = ctx.kernel_w(0.5, x, z);
    const double refined =
        wx.W(x - z) +
        m1().delta *
            convolve_refined(ctx, 0.5, [&](double y) { return wx.Wprime(y - z); }, x);
    CHECK(direct > 0.0);
    CHECK(direct == doctest::Approx(refined).epsilon(1e-8));
}

TEST_CASE("resolvent density properties") {
    auto& ctx = ctx_m1();
    // x = a: zero for every z
    for (double z : {0.2, 0.8, 1.5}) {
        CHECK(ctx.resolvent_density(0.5, 2.0, 2.0, z) ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
    // nonnegative on a grid
    for (double z = 0.05; z < 2.0; z += 0.1) {
        CHECK(ctx.resolvent_density(0.5, 1.0, 2.0, z) >= -1e-9);
    }
    // normalization: q * total mass + exit transform = 1
    const double mass = ctx.resolvent_band_mass(0.5, 1.0, 2.0, 0.0, 2.0);
    CHECK(0.5 * mass + ctx.one_sided_exit(0.5, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(ctx.resolvent_density(0.5, 3.0, 2.0, 0.5), std::domain_error);
}

TEST_CASE("one-sided exit transform") {
    auto& ctx = ctx_m1();
    CHECK(ctx.one_sided_exit(0.0, 0.3, 2.0) == 1.0);
    CHECK(ctx.one_sided_exit(0.7, 2.0, 2.0) == 1.0);
    // frozen oracle: r(1)/r(2)
    CHECK(ctx.one_sided_exit(0.5, 1.0, 2.0) == doctest::Approx(0.52277217005032480).epsilon(1e-9));
    // in (0, 1], decreasing in q and in a
    double prev_q = 1.0;
    for (double q : {0.1, 0.5, 1.0, 2.0}) {
        const double value = ctx.one_sided_exit(q, 1.0, 2.0);
        CHECK(value > 0.0);
        CHECK(value <= 1.0);
        CHECK(value < prev_q);
        prev_q = value;
    }
    double prev_a = 2.0;
    for (double a : {1.0, 1.5, 2.0, 3.0}) {
        const double value = ctx.one_sided_exit(0.5, 0.5, a);
        CHECK(value < prev_a);
        prev_a = value;
    }
}

TEST_CASE("dividend NPV") {
    auto& ctx = ctx_m1();
    // delta = 0: no dividends
    ModelSpec md0 = m1();
    md0.delta = 0.0;
    IdentityContext ctx0(md0);
    CHECK(ctx0.dividends_npv(0.5, 1.0, 2.0) == 0.0);
    // a = b: no room above the refraction level
    CHECK(ctx.dividends_npv(0.5, 0.5, 1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    // frozen oracle
    CHECK(ctx.dividends_npv(0.5, 1.0, 2.0) == doctest::Approx(0.18146849549929472).epsilon(1e-9));
    // nondecreasing in x up to the refraction level (above it the shrinking
    // time to T_a^+ dominates, and the value drops back to 0 at x = a)
    double prev = -1.0;
    for (double x : {-0.5, 0.0, 0.5, 1.0}) {
        const double value = ctx.dividends_npv(0.5, x, 2.0);
        CHECK(value >= prev - 1e-13);
        prev = value;
    }
    // the infinite-horizon value is nondecreasing across the whole range
    prev = -1.0;
    for (double x : {-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
        const double value = ctx.dividends_npv_inf(0.5, x).value;
        CHECK(value >= prev - 1e-13);
        prev = value;
    }
    // infinite horizon: q = 0 is infinite
    CHECK(ctx.dividends_npv_inf(0.0, 1.0).is_infinite);
    CHECK(ctx.dividends_npv_inf(0.0, 1.0).reason == "q = 0");
    CHECK_FALSE(ctx.dividends_npv_inf(0.5, 1.0).is_infinite);
}

TEST_CASE("capital injection NPV") {
    auto& ctx = ctx_m1();
    CHECK_THROWS_AS(ctx.capital_injection_npv(0.0, 0.5, 2.0), std::domain_error);
    // x = a: the two terms cancel
    CHECK(ctx.capital_injection_npv(0.5, 1.0, 1.0) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // frozen oracle
    CHECK(ctx.capital_injection_npv(0.5, 0.5, 2.0) ==
          doctest::Approx(0.47980153170722096).epsilon(1e-9));
    CHECK(ctx.capital_injection_npv(0.5, 0.5, 2.0) >= 0.0);

    // delta = 0 reduction to the reflected-process formula, frozen:
    // -(Zbar(0) + 1) + (Zbar(1) + 1) Z(0)/Z(1)
    ModelSpec md0 = m1();
    md0.delta = 0.0;
    IdentityContext ctx0(md0);
    CHECK(ctx0.capital_injection_npv(0.5, 0.0, 1.0) ==
          doctest::Approx(0.46230444682430729).epsilon(1e-10));

    // starting below zero costs exactly the initial deficit more
    const double at_zero = ctx.capital_injection_npv(0.5, 0.0, 2.0);
    CHECK(ctx.capital_injection_npv(0.5, -0.75, 2.0) ==
          doctest::Approx(at_zero + 0.75).epsilon(1e-10));
}

TEST_CASE("occupation kernels") {
    auto& ctx = ctx_m1();
    // R^(q,0) = r^(q)
    for (double q : {0.25, 0.5}) {
        for (double x : {-1.0, 0.5, 1.5, 2.5})
            CHECK(ctx.occupation_R(q, 0.0, x) == doctest::Approx(ctx.r(q, x)).epsilon(1e-10));
    }
    // one below/at zero
    CHECK(ctx.occupation_R(0.3, 0.4, -0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ctx.occupation_L(0.3, 0.4, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // delegation vs the expanded display
    CHECK(ctx.occupation_L(0.4, 0.3, 2.0) ==
          doctest::Approx(ctx.occupation_L_expanded(0.4, 0.3, 2.0)).epsilon(1e-10));
    CHECK_THROWS_AS(ctx.occupation_R(0.3, -0.4, 1.0), std::domain_error);
}

TEST_CASE("occupation-time transforms") {
    auto& ctx = ctx_m1();
    // q = 0 reduces to the one-sided exit at rate p
    for (double p : {0.2, 0.5}) {
        CHECK(ctx.occupation_below_lt(p, 0.0, 0.5, 2.0) ==
              doctest::Approx(ctx.one_sided_exit(p, 0.5, 2.0)).epsilon(1e-10));
        CHECK(ctx.occupation_above_lt(p, 0.0, 0.5, 2.0) ==
              doctest::Approx(ctx.one_sided_exit(p, 0.5, 2.0)).epsilon(1e-10));
    }
    CHECK(ctx.occupation_below_lt(0.0, 0.0, 0.5, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    // in (0, 1] for p, q >= 0
    for (double p : {0.0, 0.3}) {
        for (double q : {0.0, 0.4}) {
            const double below = ctx.occupation_below_lt(p, q, 0.5, 2.0);
            const double above = ctx.occupation_above_lt(p, q, 0.5, 2.0);
            CHECK(below > 0.0);
            CHECK(below <= 1.0);
            CHECK(above > 0.0);
            CHECK(above <= 1.0);
        }
    }
    // duality through the delegation
    CHECK(ctx.occupation_above_lt(0.3, 0.4, 0.5, 2.0) ==
          doctest::Approx(ctx.occupation_below_lt(0.7, -0.4, 0.5, 2.0)).epsilon(1e-12));
}

TEST_CASE("infinite-horizon identities against the finite-a limit") {
    auto& ctx = ctx_m1();
    const double q = 0.5;
    // capital injection
    const double inf_value = ctx.capital_injection_npv_inf(q, 0.5);
    double prev_gap = 1e18;
    for (double a : {5.0, 10.0, 20.0}) {
        const double gap = std::fabs(ctx.capital_injection_npv(q, 0.5, a) - inf_value);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 1e-5 * std::max(1.0, std::fabs(inf_value)));
    // dividends
    const double div_inf = ctx.dividends_npv_inf(q, 1.0).value;
    CHECK(ctx.dividends_npv(q, 1.0, 20.0) == doctest::Approx(div_inf).epsilon(1e-5));
    // resolvent density at a z below and a z above b, converging over a
    for (double z : {0.5, 1.5}) {
        const double inf_density = ctx.resolvent_density_inf(q, 1.0, z).value;
        prev_gap = 1e18;
        for (double a : {5.0, 10.0, 20.0}) {
            const double gap = std::fabs(ctx.resolvent_density(q, 1.0, a, z) - inf_density);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
        CHECK(ctx.resolvent_density(q, 1.0, 20.0, z) == doctest::Approx(inf_density).epsilon(1e-5));
    }
}

TEST_CASE("infinite-horizon resolvent at q = 0") {
    // psi_Y'(0+) = 0.25 > 0: finite density on (0, b)
    auto& ctx = ctx_m1();
    const IdentityValue inside = ctx.resolvent_density_inf(0.0, 1.0, 0.5);
    CHECK_FALSE(inside.is_infinite);
    CHECK(std::isfinite(inside.value));

    // psi_Y'(0+) = -0.75 <= 0: the measure is infinite
    IdentityContext ctx_neg(m_negative_drift());
    const IdentityValue diverged = ctx_neg.resolvent_density_inf(0.0, 1.0, 0.5);
    CHECK(diverged.is_infinite);
    CHECK(!diverged.reason.empty());
}

TEST_CASE("identity dispatch by name") {
    auto& ctx = ctx_m1();
    IdentityRequest req;
    req.quantity = "one_sided_exit";
    req.q = 0.5;
    req.x = 2.0;
    req.a = 2.0;
    const IdentityValue value = evaluate_identity(ctx, req);
    CHECK(value.value == 1.0);
    CHECK_FALSE(value.is_infinite);
    CHECK(value.method == "closed_form");

    req.quantity = "dividends_npv_inf";
    req.q = 0.0;
    req.x = 1.0;
    const IdentityValue inf = evaluate_identity(ctx, req);
    CHECK(inf.is_infinite);

    req.quantity = "nope";
    CHECK_THROWS_AS(evaluate_identity(ctx, req), std::invalid_argument);

    req.quantity = "one_sided_exit";
    req.a.reset();
    CHECK_THROWS_AS(evaluate_identity(ctx, req), std::invalid_argument);
}
