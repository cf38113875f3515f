// Command-line front end. Links the shared C API only; all numerics live
// behind librrlevy.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrlevy/rrlevy.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct ModelHandle {
    rrl_model* ptr = nullptr;
    ~ModelHandle() { rrl_model_free(ptr); }
};

struct ScaleHandle {
    rrl_scale* ptr = nullptr;
    ~ScaleHandle() { rrl_scale_free(ptr); }
};

struct ContextHandle {
    rrl_context* ptr = nullptr;
    ~ContextHandle() { rrl_context_free(ptr); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { rrl_string_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

int fail(const char* what) {
    std::cerr << "error: " << what << ": " << rrl_last_error() << "\n";
    return kExitUsage;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return true;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return false;
    }
    out << content;
    return true;
}

std::vector<double> parse_x_values(const std::string& x_list, const std::string& x_range) {
    std::vector<double> xs;
    if (!x_list.empty()) {
        std::stringstream ss(x_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) xs.push_back(std::stod(item));
        }
    }
    if (!x_range.empty()) {
        double lo = 0, hi = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::stringstream ss(x_range);
        ss >> lo >> c1 >> hi >> c2 >> step;
        if (ss.fail() || c1 != ':' || c2 != ':' || !(step > 0)) {
            throw std::invalid_argument("x-range must be lo:hi:step with step > 0");
        }
        const int n = static_cast<int>(std::llround((hi - lo) / step));
        for (int i = 0; i <= n; ++i) xs.push_back(lo + i * step);
    }
    return xs;
}

int cmd_scale(const std::string& model_path, double q, const std::string& target_name,
              const std::string& x_list, const std::string& x_range, const std::string& out_path) {
    ModelHandle model;
    if (rrl_model_from_file(model_path.c_str(), &model.ptr) != RRL_OK) return fail("model");

    const rrl_target target = (target_name == "Y" || target_name == "y") ? RRL_TARGET_Y : RRL_TARGET_X;
    ScaleHandle scale;
    if (rrl_scale_build(model.ptr, q, target, &scale.ptr) != RRL_OK) return fail("scale build");

    std::vector<double> xs;
    try {
        xs = parse_x_values(x_list, x_range);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (xs.empty()) {
        std::cerr << "error: provide --x or --x-range\n";
        return kExitUsage;
    }

    char hash[32];
    char backend[32];
    if (rrl_model_hash(model.ptr, hash, sizeof(hash)) != RRL_OK) return fail("model hash");
    if (rrl_scale_backend(scale.ptr, backend, sizeof(backend)) != RRL_OK) return fail("backend");

    std::ostringstream os;
    os << "# model_hash=" << hash << " q=" << fmt17(q) << " target="
       << (target == RRL_TARGET_Y ? "Y" : "X") << " backend=" << backend << "\n";
    os << "x,W,Wprime,Wbar,Z,Zbar\n";
    for (double x : xs) {
        double w, wp, wb, z, zb;
        if (rrl_scale_eval(scale.ptr, x, &w, &wp, &wb, &z, &zb) != RRL_OK) return fail("scale eval");
        os << fmt17(x) << ',' << fmt17(w) << ',' << fmt17(wp) << ',' << fmt17(wb) << ',' << fmt17(z)
           << ',' << fmt17(zb) << "\n";
    }
    return write_output(out_path, os.str()) ? kExitOk : kExitUsage;
}

int cmd_identity(const std::string& model_path, const std::string& request_path,
                 const std::string& quantity, const std::optional<double>& x,
                 const std::optional<double>& a, const std::optional<double>& z,
                 const std::optional<double>& z2, const std::optional<double>& p,
                 const std::optional<double>& q, const std::string& format,
                 const std::string& out_path) {
    ModelHandle model;
    if (rrl_model_from_file(model_path.c_str(), &model.ptr) != RRL_OK) return fail("model");
    ContextHandle ctx;
    if (rrl_context_new(model.ptr, &ctx.ptr) != RRL_OK) return fail("context");

    json requests = json::array();
    if (!request_path.empty()) {
        std::ifstream in(request_path);
        if (!in) {
            std::cerr << "error: cannot open " << request_path << "\n";
            return kExitUsage;
        }
        requests = json::parse(in, nullptr, false);
        if (requests.is_discarded() || !requests.is_array()) {
            std::cerr << "error: request file must be a JSON array\n";
            return kExitUsage;
        }
    } else if (!quantity.empty()) {
        json row;
        row["quantity"] = quantity;
        if (x) row["x"] = *x;
        if (a) row["a"] = *a;
        if (z) row["z"] = *z;
        if (z2) row["z2"] = *z2;
        if (p) row["p"] = *p;
        if (q) row["q"] = *q;
        requests.push_back(row);
    } else {
        std::cerr << "error: provide --requests FILE or --quantity NAME\n";
        return kExitUsage;
    }

    char hash[32];
    if (rrl_model_hash(model.ptr, hash, sizeof(hash)) != RRL_OK) return fail("model hash");

    json rows = json::array();
    for (const auto& req : requests) {
        if (!req.is_object() || !req.contains("quantity") || !req["quantity"].is_string()) {
            std::cerr << "error: each request needs a string 'quantity'\n";
            return kExitUsage;
        }
        json params = req;
        params.erase("quantity");
        OwnedString result;
        if (rrl_identity_eval(ctx.ptr, req["quantity"].get<std::string>().c_str(),
                              params.dump().c_str(), &result.ptr) != RRL_OK)
            return fail("identity");
        rows.push_back(json::parse(result.str()));
    }

    std::string content;
    if (format == "csv") {
        std::ostringstream os;
        os << "# model_hash=" << hash << "\n";
        os << "name,x,a,z,z2,p,q,value,reason,method\n";
        for (const auto& row : rows) {
            auto cell = [&](const char* key) -> std::string {
                if (!row["params"].contains(key)) return "";
                return fmt17(row["params"][key].get<double>());
            };
            const bool inf = row["value"].is_string();
            os << row["name"].get<std::string>() << ',' << cell("x") << ',' << cell("a") << ','
               << cell("z") << ',' << cell("z2") << ',' << cell("p") << ',' << cell("q") << ','
               << (inf ? "inf" : fmt17(row["value"].get<double>())) << ','
               << (row.contains("reason") ? row["reason"].get<std::string>() : "") << ','
               << row["method"].get<std::string>() << "\n";
        }
        content = os.str();
    } else {
        json doc;
        doc["model_hash"] = hash;
        doc["results"] = rows;
        content = doc.dump(2) + "\n";
    }
    return write_output(out_path, content) ? kExitOk : kExitUsage;
}

int cmd_simulate(const std::string& model_path, const std::string& config_path,
                 const std::optional<std::uint64_t>& seed, const std::optional<std::uint64_t>& paths,
                 const std::string& scheme, const std::optional<double>& step,
                 const std::optional<int>& threads, int trace_paths, const std::string& trace_out,
                 const std::string& out_path) {
    ModelHandle model;
    if (rrl_model_from_file(model_path.c_str(), &model.ptr) != RRL_OK) return fail("model");

    json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open " << config_path << "\n";
            return kExitUsage;
        }
        config = json::parse(in, nullptr, false);
        if (config.is_discarded() || !config.is_object()) {
            std::cerr << "error: sim config must be a JSON object\n";
            return kExitUsage;
        }
    }
    if (seed) config["seed"] = *seed;
    if (paths) config["n_paths"] = *paths;
    if (!scheme.empty()) config["scheme"] = scheme;
    if (step) config["step"] = *step;
    if (threads) config["threads"] = *threads;

    OwnedString result;
    if (rrl_simulate(model.ptr, config.dump().c_str(), &result.ptr) != RRL_OK)
        return fail("simulate");
    if (!write_output(out_path, result.str() + "\n")) return kExitUsage;

    if (trace_paths > 0) {
        OwnedString trace;
        if (rrl_simulate_trace(model.ptr, config.dump().c_str(), trace_paths, &trace.ptr) != RRL_OK)
            return fail("trace");
        if (!write_output(trace_out.empty() ? std::string("trace.csv") : trace_out, trace.str()))
            return kExitUsage;
    }
    return kExitOk;
}

int cmd_verify(const std::string& model_path, const std::string& suite,
               const std::optional<std::uint64_t>& seed, const std::optional<std::uint64_t>& paths,
               const std::optional<int>& threads, const std::string& out_path) {
    ModelHandle model;
    if (rrl_model_from_file(model_path.c_str(), &model.ptr) != RRL_OK) return fail("model");

    json options = json::object();
    if (seed) options["seed"] = *seed;
    if (paths) options["n_paths"] = *paths;
    if (threads) options["threads"] = *threads;

    OwnedString report;
    OwnedString summary;
    int all_passed = 0;
    if (rrl_verify(model.ptr, suite.c_str(), options.dump().c_str(), &report.ptr, &summary.ptr,
                   &all_passed) != RRL_OK)
        return fail("verify");

    const std::string report_path = out_path.empty() ? ("verify_" + suite + ".json") : out_path;
    if (!write_output(report_path, report.str() + "\n")) return kExitUsage;
    std::cout << summary.str();
    std::cout << "report written to " << report_path << "\n";
    return all_passed ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"refracted-reflected Levy process toolkit"};
    app.require_subcommand(1);

    std::string model_path, out_path;

    auto* scale = app.add_subcommand("scale", "evaluate W, Wprime, Wbar, Z, Zbar on a grid");
    double q = 0.0;
    std::string target = "X", x_list, x_range;
    scale->add_option("--model", model_path, "model config file")->required();
    scale->add_option("--q", q, "discount rate q >= 0")->required();
    scale->add_option("--target", target, "X or Y (default X)");
    scale->add_option("--x", x_list, "comma-separated x values");
    scale->add_option("--x-range", x_range, "lo:hi:step inclusive grid");
    scale->add_option("--out", out_path, "output CSV path (default stdout)");

    auto* identity = app.add_subcommand("identity", "evaluate named fluctuation identities");
    std::string request_path, quantity, format = "json";
    std::optional<double> ox, oa, oz, oz2, op, oq;
    identity->add_option("--model", model_path, "model config file")->required();
    identity->add_option("--requests", request_path, "JSON request file");
    identity->add_option("--quantity", quantity, "single quantity name");
    identity->add_option("--x", ox, "level x");
    identity->add_option("--a", oa, "upper level a");
    identity->add_option("--z", oz, "density argument z (or band lower edge)");
    identity->add_option("--z2", oz2, "band upper edge");
    identity->add_option("--p", op, "rate p");
    identity->add_option("--q", oq, "rate q");
    identity->add_option("--format", format, "json or csv (default json)");
    identity->add_option("--out", out_path, "output path (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo ensemble");
    std::string config_path, scheme, trace_out;
    std::optional<std::uint64_t> seed, paths;
    std::optional<double> step;
    std::optional<int> threads;
    int trace_paths = 0;
    simulate->add_option("--model", model_path, "model config file")->required();
    simulate->add_option("--config", config_path, "sim config file")->required();
    simulate->add_option("--seed", seed, "override seed");
    simulate->add_option("--paths", paths, "override n_paths");
    simulate->add_option("--scheme", scheme, "override scheme: exact_bv or euler");
    simulate->add_option("--step", step, "override Euler step");
    simulate->add_option("--threads", threads, "worker threads (0 = auto)");
    simulate->add_option("--trace-paths", trace_paths, "dump a trace of the first k paths");
    simulate->add_option("--trace-out", trace_out, "trace CSV path (default trace.csv)");
    simulate->add_option("--out", out_path, "output JSON path (default stdout)");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    verify->add_option("--model", model_path, "model config file")->required();
    verify->add_option("--suite", suite, "analytic | lemma_pi | degeneracy | mc_small | mc_full")
        ->required();
    verify->add_option("--seed", seed, "MC seed");
    verify->add_option("--paths", paths, "MC paths per check");
    verify->add_option("--threads", threads, "worker threads (0 = auto)");
    verify->add_option("--out", out_path, "report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (scale->parsed()) return cmd_scale(model_path, q, target, x_list, x_range, out_path);
    if (identity->parsed())
        return cmd_identity(model_path, request_path, quantity, ox, oa, oz, oz2, op, oq, format,
                            out_path);
    if (simulate->parsed())
        return cmd_simulate(model_path, config_path, seed, paths, scheme, step, threads,
                            trace_paths, trace_out, out_path);
    if (verify->parsed()) return cmd_verify(model_path, suite, seed, paths, threads, out_path);
    return kExitUsage;
}
