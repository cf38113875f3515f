// Exercises the shared-library surface the way an external consumer would:
// opaque handles, status codes, and JSON strings only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "rrlevy/rrlevy.h"

namespace {

const char* kM1 = R"({"sigma": 0.0, "drift": 1.5,
                      "jumps": [{"rate": 1.0, "exp_rate": 1.0}],
                      "delta": 0.25, "b": 1.0})";

struct Model {
    rrl_model* ptr = nullptr;
    Model() { REQUIRE(rrl_model_from_json(kM1, &ptr) == RRL_OK); }
    ~Model() { rrl_model_free(ptr); }
};

}  // namespace

TEST_CASE("version and error strings exist") {
    CHECK(std::strlen(rrl_version()) > 0);
    CHECK(rrl_last_error() != nullptr);
}

TEST_CASE("model lifecycle and exponent evaluation") {
    Model model;
    double value = 0.0;
    CHECK(rrl_model_psi(model.ptr, 1.0, &value) == RRL_OK);
    CHECK(value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rrl_model_psi_y(model.ptr, 1.0, &value) == RRL_OK);
    CHECK(value == doctest::Approx(0.75).epsilon(1e-14));

    CHECK(rrl_model_psi(model.ptr, -1.0, &value) == RRL_ERR_DOMAIN);
    CHECK(std::strlen(rrl_last_error()) > 0);

    CHECK(rrl_model_phi(model.ptr, 0.5, &value) == RRL_OK);
    CHECK(value == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-12));

    double dx = 0.0, dy = 0.0;
    CHECK(rrl_model_net_drift(model.ptr, &dx, &dy) == RRL_OK);
    CHECK(dx == doctest::Approx(0.5));
    CHECK(dy == doctest::Approx(0.25));

    int bounded = 0;
    CHECK(rrl_model_is_bounded_variation(model.ptr, &bounded) == RRL_OK);
    CHECK(bounded == 1);

    char hash[32];
    CHECK(rrl_model_hash(model.ptr, hash, sizeof(hash)) == RRL_OK);
    CHECK(std::strlen(hash) == 16);
    CHECK(rrl_model_hash(model.ptr, hash, 4) == RRL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("parse failures carry messages") {
    rrl_model* model = nullptr;
    CHECK(rrl_model_from_json("{\"sigma\": 0}", &model) == RRL_ERR_PARSE);
    CHECK(model == nullptr);
    CHECK(std::string(rrl_last_error()).find("drift") != std::string::npos);

    CHECK(rrl_model_from_file("/does/not/exist.json", &model) == RRL_ERR_PARSE);
    // condition (H) violations surface as invalid arguments
    CHECK(rrl_model_from_json(R"({"sigma":0,"drift":0.1,"jumps":[],"delta":0.5,"b":1})", &model) ==
          RRL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("scale evaluation through the C surface") {
    Model model;
    rrl_scale* scale = nullptr;
    REQUIRE(rrl_scale_build(model.ptr, 0.5, RRL_TARGET_X, &scale) == RRL_OK);

    char backend[32];
    CHECK(rrl_scale_backend(scale, backend, sizeof(backend)) == RRL_OK);
    CHECK(std::string(backend) == "closed_form");

    double w = 0, wp = 0, wb = 0, z = 0, zb = 0;
    CHECK(rrl_scale_eval(scale, 1.0, &w, &wp, &wb, &z, &zb) == RRL_OK);
    CHECK(w == doctest::Approx(1.4852246054530027).epsilon(1e-12));
    CHECK(z == doctest::Approx(1.5235109986964115).epsilon(1e-12));
    CHECK(rrl_scale_eval(scale, -1.0, &w, nullptr, nullptr, &z, nullptr) == RRL_OK);
    CHECK(w == 0.0);
    CHECK(z == 1.0);
    rrl_scale_free(scale);

    double inverted = 0.0;
    CHECK(rrl_scale_invert_laplace(model.ptr, 0.5, RRL_TARGET_X, 1.0, &inverted) == RRL_OK);
    CHECK(inverted == doctest::Approx(1.4852246054530027).epsilon(1e-8));
    CHECK(rrl_scale_invert_laplace(model.ptr, 0.5, RRL_TARGET_X, 0.0, &inverted) ==
          RRL_ERR_DOMAIN);
}

TEST_CASE("identity evaluation returns JSON rows") {
    Model model;
    rrl_context* ctx = nullptr;
    REQUIRE(rrl_context_new(model.ptr, &ctx) == RRL_OK);

    char* out = nullptr;
    CHECK(rrl_identity_eval(ctx, "one_sided_exit", R"({"q":0.5,"x":2,"a":2})", &out) == RRL_OK);
    std::string text(out);
    rrl_string_free(out);
    CHECK(text.find("\"value\": 1.0") != std::string::npos);

    out = nullptr;
    CHECK(rrl_identity_eval(ctx, "dividends_npv_inf", R"({"q":0,"x":1})", &out) == RRL_OK);
    text = out;
    rrl_string_free(out);
    CHECK(text.find("\"inf\"") != std::string::npos);
    CHECK(text.find("q = 0") != std::string::npos);

    CHECK(rrl_identity_eval(ctx, "unknown_thing", "{}", &out) == RRL_ERR_INVALID_ARGUMENT);
    CHECK(std::string(rrl_last_error()).find("one_sided_exit") != std::string::npos);

    rrl_context_free(ctx);

    char* names = nullptr;
    CHECK(rrl_identity_names(&names) == RRL_OK);
    CHECK(std::string(names).find("capital_injection_npv") != std::string::npos);
    rrl_string_free(names);
}

TEST_CASE("simulation through the C surface is reproducible") {
    Model model;
    const char* config = R"({"x0":1,"a":2,"q":0.5,"p":0.3,"n_paths":5000,"seed":42,
                             "scheme":"exact_bv"})";
    char* first = nullptr;
    char* second = nullptr;
    REQUIRE(rrl_simulate(model.ptr, config, &first) == RRL_OK);
    REQUIRE(rrl_simulate(model.ptr, config, &second) == RRL_OK);
    CHECK(std::string(first) == std::string(second));
    CHECK(std::string(first).find("exit_lt") != std::string::npos);
    rrl_string_free(first);
    rrl_string_free(second);

    // ExactBV with sigma > 0 is a config error
    rrl_model* gaussian = nullptr;
    REQUIRE(rrl_model_from_json(R"({"sigma":0.5,"drift":1.5,
                                    "jumps":[{"rate":1,"exp_rate":1}],
                                    "delta":0.25,"b":1})",
                                &gaussian) == RRL_OK);
    char* out = nullptr;
    CHECK(rrl_simulate(gaussian, config, &out) == RRL_ERR_INVALID_ARGUMENT);
    rrl_model_free(gaussian);

    char* trace = nullptr;
    REQUIRE(rrl_simulate_trace(model.ptr, config, 1, &trace) == RRL_OK);
    CHECK(std::string(trace).find("path,t,V,L,R,event") == 0);
    rrl_string_free(trace);
}

TEST_CASE("verification through the C surface") {
    Model model;
    char* report = nullptr;
    char* summary = nullptr;
    int ok = 0;
    REQUIRE(rrl_verify(model.ptr, "degeneracy", nullptr, &report, &summary, &ok) == RRL_OK);
    CHECK(ok == 1);
    CHECK(std::string(report).find("rel_err") != std::string::npos);
    CHECK(std::string(summary).find("PASS") != std::string::npos);
    rrl_string_free(report);
    rrl_string_free(summary);

    CHECK(rrl_verify(model.ptr, "bogus_suite", nullptr, nullptr, nullptr, &ok) ==
          RRL_ERR_INVALID_ARGUMENT);
}
