#include "rrlevy/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rrlevy {

using nlohmann::json;

namespace {

json parse_json_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream msg;
        msg << what << ": malformed JSON (" << e.what() << ")";
        throw parse_error(msg.str());
    }
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            std::ostringstream msg;
            msg << where << ": unknown key '" << key << "'";
            throw parse_error(msg.str());
        }
    }
}

double number_field(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key)) {
        std::ostringstream msg;
        msg << where << ": missing field '" << key << "'";
        throw parse_error(msg.str());
    }
    if (!obj[key].is_number()) {
        std::ostringstream msg;
        msg << where << ": field '" << key << "' must be a number";
        throw parse_error(msg.str());
    }
    return obj[key].get<double>();
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write file: " + path);
    out << content;
}

ModelSpec parse_model_json(const std::string& text) {
    const json j = parse_json_text(text, "model config");
    if (!j.is_object()) throw parse_error("model config: top level must be an object");
    reject_unknown_keys(j, {"sigma", "drift", "jumps", "delta", "b"}, "model config");

    ModelSpec model;
    model.sigma = number_field(j, "sigma", "model config");
    model.drift = number_field(j, "drift", "model config");
    model.delta = number_field(j, "delta", "model config");
    model.b = number_field(j, "b", "model config");
    if (j.contains("jumps")) {
        if (!j["jumps"].is_array()) throw parse_error("model config: 'jumps' must be an array");
        int idx = 0;
        for (const auto& item : j["jumps"]) {
            std::ostringstream where;
            where << "model config: jumps[" << idx << "]";
            if (!item.is_object()) throw parse_error(where.str() + " must be an object");
            reject_unknown_keys(item, {"rate", "exp_rate"}, where.str().c_str());
            JumpComponent comp;
            comp.rate = number_field(item, "rate", where.str().c_str());
            comp.exp_rate = number_field(item, "exp_rate", where.str().c_str());
            model.jumps.push_back(comp);
            ++idx;
        }
    }
    model.validate();
    return model;
}

ModelSpec load_model_file(const std::string& path) { return parse_model_json(read_text_file(path)); }

std::string model_to_json(const ModelSpec& model) {
    json j;
    j["sigma"] = model.sigma;
    j["drift"] = model.drift;
    j["delta"] = model.delta;
    j["b"] = model.b;
    j["jumps"] = json::array();
    for (const auto& c : model.jumps) j["jumps"].push_back({{"rate", c.rate}, {"exp_rate", c.exp_rate}});
    return j.dump();
}

std::string model_hash(const ModelSpec& model) {
    std::ostringstream canon;
    canon << "sigma=" << format_double(model.sigma) << ";drift=" << format_double(model.drift)
          << ";delta=" << format_double(model.delta) << ";b=" << format_double(model.b) << ";jumps=";
    for (const auto& c : model.jumps)
        canon << "(" << format_double(c.rate) << "," << format_double(c.exp_rate) << ")";
    const std::string s = canon.str();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

std::vector<IdentityRequest> parse_request_json(const std::string& text) {
    const json j = parse_json_text(text, "request file");
    if (!j.is_array()) throw parse_error("request file: top level must be an array");
    std::vector<IdentityRequest> out;
    int idx = 0;
    for (const auto& item : j) {
        std::ostringstream where;
        where << "request file: entry " << idx;
        if (!item.is_object()) throw parse_error(where.str() + " must be an object");
        reject_unknown_keys(item, {"quantity", "x", "a", "z", "z2", "p", "q"}, where.str().c_str());
        if (!item.contains("quantity") || !item["quantity"].is_string())
            throw parse_error(where.str() + ": missing string field 'quantity'");
        IdentityRequest req;
        req.quantity = item["quantity"].get<std::string>();
        auto opt = [&](const char* key) -> std::optional<double> {
            if (!item.contains(key)) return std::nullopt;
            if (!item[key].is_number()) throw parse_error(where.str() + ": '" + key + "' must be a number");
            return item[key].get<double>();
        };
        req.x = opt("x");
        req.a = opt("a");
        req.z = opt("z");
        req.z2 = opt("z2");
        req.p = opt("p");
        req.q = opt("q");
        out.push_back(req);
        ++idx;
    }
    return out;
}

std::vector<IdentityRequest> load_request_file(const std::string& path) {
    return parse_request_json(read_text_file(path));
}

SimConfig parse_sim_config_json(const std::string& text) {
    const json j = parse_json_text(text, "sim config");
    if (!j.is_object()) throw parse_error("sim config: top level must be an object");
    reject_unknown_keys(j,
                        {"x0", "a", "q", "p", "n_paths", "seed", "scheme", "step", "horizon_cap",
                         "band", "threads"},
                        "sim config");
    SimConfig config;
    config.x0 = number_field(j, "x0", "sim config");
    config.a = number_field(j, "a", "sim config");
    if (j.contains("q")) config.q = number_field(j, "q", "sim config");
    if (j.contains("p")) config.p = number_field(j, "p", "sim config");
    if (j.contains("n_paths")) config.n_paths = j["n_paths"].get<std::uint64_t>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("scheme")) {
        const std::string scheme = j["scheme"].get<std::string>();
        if (scheme == "exact_bv") {
            config.scheme = SimScheme::ExactBV;
        } else if (scheme == "euler") {
            config.scheme = SimScheme::EulerApprox;
        } else {
            throw parse_error("sim config: scheme must be 'exact_bv' or 'euler'");
        }
    }
    if (j.contains("step")) config.step = number_field(j, "step", "sim config");
    if (j.contains("horizon_cap")) config.horizon_cap = number_field(j, "horizon_cap", "sim config");
    if (j.contains("threads")) config.threads = j["threads"].get<int>();
    if (j.contains("band")) {
        if (!j["band"].is_array() || j["band"].size() != 2)
            throw parse_error("sim config: band must be [z1, z2]");
        config.band = std::make_pair(j["band"][0].get<double>(), j["band"][1].get<double>());
    }
    return config;
}

SimConfig load_sim_config_file(const std::string& path) {
    return parse_sim_config_json(read_text_file(path));
}

namespace {

json request_params_json(const IdentityRequest& req) {
    json p = json::object();
    if (req.x) p["x"] = *req.x;
    if (req.a) p["a"] = *req.a;
    if (req.z) p["z"] = *req.z;
    if (req.z2) p["z2"] = *req.z2;
    if (req.p) p["p"] = *req.p;
    if (req.q) p["q"] = *req.q;
    return p;
}

}  // namespace

std::string identity_results_to_json(const ModelSpec& model,
                                     const std::vector<IdentityRequest>& requests,
                                     const std::vector<IdentityValue>& values) {
    json out;
    out["model_hash"] = model_hash(model);
    out["results"] = json::array();
    for (std::size_t i = 0; i < requests.size(); ++i) {
        json row;
        row["name"] = requests[i].quantity;
        row["params"] = request_params_json(requests[i]);
        if (values[i].is_infinite) {
            row["value"] = "inf";
            row["reason"] = values[i].reason;
        } else {
            row["value"] = values[i].value;
        }
        row["method"] = values[i].method;
        out["results"].push_back(row);
    }
    return out.dump(2);
}

std::string identity_results_to_csv(const ModelSpec& model,
                                    const std::vector<IdentityRequest>& requests,
                                    const std::vector<IdentityValue>& values) {
    std::ostringstream os;
    os << "# model_hash=" << model_hash(model) << "\n";
    os << "name,x,a,z,z2,p,q,value,reason,method\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& req = requests[i];
        const auto& val = values[i];
        os << req.quantity << ',' << cell(req.x) << ',' << cell(req.a) << ',' << cell(req.z) << ','
           << cell(req.z2) << ',' << cell(req.p) << ',' << cell(req.q) << ','
           << (val.is_infinite ? "inf" : format_double(val.value)) << ',' << val.reason << ','
           << val.method << "\n";
    }
    return os.str();
}

std::string estimates_to_json(const ModelSpec& model, const SimConfig& config,
                              const EstimateSet& estimates) {
    json out;
    out["model_hash"] = model_hash(model);
    out["config"] = {{"x0", config.x0},
                     {"a", config.a},
                     {"q", config.q},
                     {"p", config.p},
                     {"n_paths", config.n_paths},
                     {"seed", config.seed},
                     {"scheme", config.scheme == SimScheme::ExactBV ? "exact_bv" : "euler"},
                     {"step", config.step},
                     {"horizon_cap", config.horizon_cap}};
    if (config.band) out["config"]["band"] = {config.band->first, config.band->second};
    out["n_paths"] = estimates.n_paths;
    out["censored"] = estimates.n_censored;
    json funcs = json::object();
    for (const auto& [name, est] : estimates.estimates) {
        funcs[name] = {{"mean", est.mean}, {"stddev", est.stddev}, {"stderr", est.stderr_of_mean},
                       {"n", estimates.n_paths}, {"censored", estimates.n_censored}};
    }
    out["functionals"] = funcs;
    return out.dump(2);
}

std::string reports_to_json(const ModelSpec& model, const std::vector<VerificationReport>& reports) {
    json out = json::array();
    for (const auto& r : reports) {
        json row;
        row["name"] = r.name;
        row["inputs"] = r.inputs;
        row["lhs"] = r.lhs;
        row["rhs"] = r.rhs;
        row["abs_err"] = r.abs_err;
        row["rel_err"] = r.rel_err;
        row["tolerance"] = r.tolerance;
        row["pass"] = r.pass;
        if (r.is_mc) {
            row["z_score"] = r.z_score;
            row["stderr"] = r.stderr_of_mean;
            row["n_paths"] = r.n_paths;
        }
        if (!r.note.empty()) row["note"] = r.note;
        row["model_hash"] = model_hash(model);
        out.push_back(row);
    }
    return out.dump(2);
}

std::string reports_to_table(const std::vector<VerificationReport>& reports) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof(line), "%-38s %-34s %12s %10s  %s\n", "check", "inputs", "err",
                  "tol", "status");
    os << line;
    for (const auto& r : reports) {
        const double err = r.is_mc ? std::fabs(r.z_score) : r.rel_err;
        const double tol = r.is_mc ? 3.0 : r.tolerance;
        std::snprintf(line, sizeof(line), "%-38s %-34s %12.3e %10.1e  %s%s%s\n", r.name.c_str(),
                      r.inputs.c_str(), err, tol, r.pass ? "PASS" : "FAIL",
                      r.note.empty() ? "" : " — ", r.note.c_str());
        os << line;
    }
    int passed = 0;
    for (const auto& r : reports) passed += r.pass ? 1 : 0;
    os << passed << "/" << reports.size() << " checks passed\n";
    return os.str();
}

}  // namespace rrlevy
