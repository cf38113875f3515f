#include "rrlevy/rrlevy.h"

#include <cstring>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rrlevy/identities.hpp"
#include "rrlevy/io.hpp"
#include "rrlevy/model.hpp"
#include "rrlevy/numerics.hpp"
#include "rrlevy/scale.hpp"
#include "rrlevy/simulate.hpp"
#include "rrlevy/verify.hpp"

using nlohmann::json;

struct rrl_model {
    rrlevy::ModelSpec spec;
};

struct rrl_scale {
    rrlevy::ScaleEvaluator evaluator;
};

struct rrl_context {
    rrlevy::IdentityContext context;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
rrl_status guarded(Fn&& fn) {
    try {
        fn();
        return RRL_OK;
    } catch (const rrlevy::parse_error& e) {
        set_error(e.what());
        return RRL_ERR_PARSE;
    } catch (const std::domain_error& e) {
        set_error(e.what());
        return RRL_ERR_DOMAIN;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return RRL_ERR_INVALID_ARGUMENT;
    } catch (const rrlevy::numeric_error& e) {
        set_error(e.what());
        return RRL_ERR_NUMERIC;
    } catch (const std::exception& e) {
        set_error(e.what());
        return RRL_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return RRL_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

rrl_status copy_to_buffer(const std::string& s, char* buffer, size_t buffer_size) {
    if (buffer == nullptr || buffer_size <= s.size()) {
        set_error("buffer too small");
        return RRL_ERR_INVALID_ARGUMENT;
    }
    std::memcpy(buffer, s.c_str(), s.size() + 1);
    return RRL_OK;
}

rrl_status require(bool cond, const char* message) {
    if (!cond) {
        set_error(message);
        return RRL_ERR_INVALID_ARGUMENT;
    }
    return RRL_OK;
}

}  // namespace

extern "C" {

const char* rrl_version(void) { return "1.0.0"; }

const char* rrl_last_error(void) { return g_last_error.c_str(); }

void rrl_string_free(char* s) { delete[] s; }

rrl_status rrl_model_from_json(const char* json_text, rrl_model** out) {
    if (rrl_status st = require(json_text && out, "null argument")) return st;
    return guarded([&] { *out = new rrl_model{rrlevy::parse_model_json(json_text)}; });
}

rrl_status rrl_model_from_file(const char* path, rrl_model** out) {
    if (rrl_status st = require(path && out, "null argument")) return st;
    return guarded([&] { *out = new rrl_model{rrlevy::load_model_file(path)}; });
}

void rrl_model_free(rrl_model* model) { delete model; }

rrl_status rrl_model_to_json(const rrl_model* model, char** out_json) {
    if (rrl_status st = require(model && out_json, "null argument")) return st;
    return guarded([&] { *out_json = dup_string(rrlevy::model_to_json(model->spec)); });
}

rrl_status rrl_model_hash(const rrl_model* model, char* buffer, size_t buffer_size) {
    if (rrl_status st = require(model != nullptr, "null model")) return st;
    rrl_status result = RRL_OK;
    rrl_status st = guarded([&] { result = copy_to_buffer(rrlevy::model_hash(model->spec), buffer, buffer_size); });
    return st != RRL_OK ? st : result;
}

rrl_status rrl_model_psi(const rrl_model* model, double theta, double* out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] { *out = model->spec.psi(theta); });
}

rrl_status rrl_model_psi_y(const rrl_model* model, double theta, double* out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] { *out = model->spec.psi_y(theta); });
}

rrl_status rrl_model_phi(const rrl_model* model, double q, double* out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] { *out = model->spec.phi(q); });
}

rrl_status rrl_model_varphi(const rrl_model* model, double q, double* out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] { *out = model->spec.varphi(q); });
}

rrl_status rrl_model_net_drift(const rrl_model* model, double* psi_prime0, double* psi_y_prime0) {
    if (rrl_status st = require(model != nullptr, "null model")) return st;
    return guarded([&] {
        const auto [x_drift, y_drift] = model->spec.net_drift();
        if (psi_prime0) *psi_prime0 = x_drift;
        if (psi_y_prime0) *psi_y_prime0 = y_drift;
    });
}

rrl_status rrl_model_is_bounded_variation(const rrl_model* model, int* out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] {
        *out = model->spec.classify() == rrlevy::PathVariation::BoundedVariation ? 1 : 0;
    });
}

rrl_status rrl_scale_build(const rrl_model* model, double q, rrl_target target, rrl_scale** out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] {
        const auto t = target == RRL_TARGET_X ? rrlevy::ScaleTarget::X : rrlevy::ScaleTarget::Y;
        *out = new rrl_scale{rrlevy::ScaleEvaluator::build(model->spec, q, t)};
    });
}

void rrl_scale_free(rrl_scale* scale) { delete scale; }

rrl_status rrl_scale_backend(const rrl_scale* scale, char* buffer, size_t buffer_size) {
    if (rrl_status st = require(scale != nullptr, "null scale")) return st;
    return copy_to_buffer(scale->evaluator.backend_name(), buffer, buffer_size);
}

rrl_status rrl_scale_eval(const rrl_scale* scale, double x, double* w, double* w_prime,
                          double* w_bar, double* z, double* z_bar) {
    if (rrl_status st = require(scale != nullptr, "null scale")) return st;
    return guarded([&] {
        if (w) *w = scale->evaluator.W(x);
        if (w_prime) *w_prime = scale->evaluator.Wprime(x);
        if (w_bar) *w_bar = scale->evaluator.Wbar(x);
        if (z) *z = scale->evaluator.Z(x);
        if (z_bar) *z_bar = scale->evaluator.Zbar(x);
    });
}

rrl_status rrl_scale_invert_laplace(const rrl_model* model, double q, rrl_target target, double x,
                                    double* out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] {
        const auto t = target == RRL_TARGET_X ? rrlevy::ScaleTarget::X : rrlevy::ScaleTarget::Y;
        *out = rrlevy::invert_laplace(model->spec, q, t, x);
    });
}

rrl_status rrl_context_new(const rrl_model* model, rrl_context** out) {
    if (rrl_status st = require(model && out, "null argument")) return st;
    return guarded([&] { *out = new rrl_context{rrlevy::IdentityContext(model->spec)}; });
}

void rrl_context_free(rrl_context* ctx) { delete ctx; }

rrl_status rrl_identity_eval(const rrl_context* ctx, const char* name, const char* params_json,
                             char** out_json) {
    if (rrl_status st = require(ctx && name && out_json, "null argument")) return st;
    return guarded([&] {
        rrlevy::IdentityRequest req;
        req.quantity = name;
        if (params_json != nullptr && params_json[0] != '\0') {
            json params = json::parse(params_json, nullptr, false);
            if (params.is_discarded() || !params.is_object())
                throw rrlevy::parse_error("identity params: malformed JSON object");
            auto opt = [&](const char* key) -> std::optional<double> {
                if (!params.contains(key)) return std::nullopt;
                return params[key].get<double>();
            };
            req.x = opt("x");
            req.a = opt("a");
            req.z = opt("z");
            req.z2 = opt("z2");
            req.p = opt("p");
            req.q = opt("q");
        }
        const rrlevy::IdentityValue value = rrlevy::evaluate_identity(ctx->context, req);
        const std::string text = rrlevy::identity_results_to_json(ctx->context.model(), {req}, {value});
        // unwrap the single result row
        json doc = json::parse(text);
        json row = doc["results"][0];
        row["model_hash"] = doc["model_hash"];
        *out_json = dup_string(row.dump(2));
    });
}

rrl_status rrl_identity_names(char** out_json) {
    if (rrl_status st = require(out_json != nullptr, "null argument")) return st;
    return guarded([&] {
        json names = json::array();
        for (const auto& n : rrlevy::identity_quantity_names()) names.push_back(n);
        *out_json = dup_string(names.dump());
    });
}

rrl_status rrl_simulate(const rrl_model* model, const char* config_json, char** out_json) {
    if (rrl_status st = require(model && config_json && out_json, "null argument")) return st;
    return guarded([&] {
        const rrlevy::SimConfig config = rrlevy::parse_sim_config_json(config_json);
        const rrlevy::EstimateSet estimates = rrlevy::run_ensemble(model->spec, config);
        *out_json = dup_string(rrlevy::estimates_to_json(model->spec, config, estimates));
    });
}

rrl_status rrl_simulate_trace(const rrl_model* model, const char* config_json, int n_trace,
                              char** out_csv) {
    if (rrl_status st = require(model && config_json && out_csv, "null argument")) return st;
    return guarded([&] {
        const rrlevy::SimConfig config = rrlevy::parse_sim_config_json(config_json);
        std::ostringstream os;
        rrlevy::write_trace_csv(model->spec, config, n_trace, os);
        *out_csv = dup_string(os.str());
    });
}

rrl_status rrl_verify(const rrl_model* model, const char* suite, const char* options_json,
                      char** out_report_json, char** out_summary, int* all_passed) {
    if (rrl_status st = require(model && suite, "null argument")) return st;
    return guarded([&] {
        rrlevy::SuiteOptions options;
        if (options_json != nullptr && options_json[0] != '\0') {
            json j = json::parse(options_json, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw rrlevy::parse_error("verify options: malformed JSON object");
            if (j.contains("seed")) options.seed = j["seed"].get<std::uint64_t>();
            if (j.contains("n_paths")) options.n_paths = j["n_paths"].get<std::uint64_t>();
            if (j.contains("threads")) options.threads = j["threads"].get<int>();
        }
        const auto reports = rrlevy::run_suite(model->spec, suite, options);
        if (out_report_json) *out_report_json = dup_string(rrlevy::reports_to_json(model->spec, reports));
        if (out_summary) *out_summary = dup_string(rrlevy::reports_to_table(reports));
        if (all_passed) *all_passed = rrlevy::all_passed(reports) ? 1 : 0;
    });
}

}  // extern "C"
