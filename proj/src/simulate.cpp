#include "rrlevy/simulate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rrlevy/numerics.hpp"

namespace rrlevy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using TraceSink = PathObserver;

/// e^{-q t0} - e^{-q t1} scaled to the plain length for q = 0.
double discounted_length(double q, double t0, double t1) {
    if (t1 <= t0) return 0.0;
    if (q == 0.0) return t1 - t0;
    return (std::exp(-q * t0) - std::exp(-q * t1)) / q;
}

int sample_component(const ModelSpec& model, double total_rate, CounterRng& rng) {
    double u = rng.uniform() * total_rate;
    for (std::size_t i = 0; i < model.jumps.size(); ++i) {
        u -= model.jumps[i].rate;
        if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(model.jumps.size()) - 1;
}

PathFunctionals exact_bv_path(const ModelSpec& model, const SimConfig& config, CounterRng& rng,
                              const TraceSink* sink) {
    const double c = model.drift;
    const double delta = model.delta;
    const double b = model.b;
    const double a = config.a;
    const double q = config.q;
    const double total_rate = model.total_jump_rate();

    PathFunctionals f;
    double t = 0.0;
    double v = config.x0;
    double raw_l = 0.0, raw_r = 0.0, jump_sum = 0.0;

    auto emit = [&](const char* event) {
        if (sink) (*sink)({t, v, raw_l, raw_r, config.x0 + c * t - jump_sum, event});
    };

    if (v < 0.0) {
        f.disc_R += -v;
        raw_r += -v;
        v = 0.0;
        emit("inject");
    }
    if (v >= a) {
        f.t_up = 0.0;
        emit("exit");
        return f;
    }
    emit("start");

    double next_jump = (total_rate > 0.0) ? rng.exponential(total_rate) : kInf;

    auto accrue = [&](double t0, double t1, double v0, double slope, bool below) {
        if (t1 <= t0) return;
        const double dlen = discounted_length(q, t0, t1);
        if (below) {
            f.occ_below += t1 - t0;
        } else {
            f.occ_above += t1 - t0;
            f.disc_L += delta * dlen;
            raw_l += delta * (t1 - t0);
        }
        if (config.band) {
            const auto [z1, z2] = *config.band;
            // v rises linearly: clip the band crossing to the segment.
            double enter = t0, leave = t1;
            if (v0 < z1) enter = t0 + (z1 - v0) / slope;
            const double v1 = v0 + slope * (t1 - t0);
            if (v1 > z2) leave = t0 + (z2 - v0) / slope;
            if (leave > enter) {
                f.band_mass += discounted_length(q, std::max(enter, t0), std::min(leave, t1));
            }
        }
    };

    enum class Event { Exit, Censor, Switch, Jump };
    while (true) {
        const bool below = v < b;
        const double slope = below ? c : c - delta;
        const double t_hit = t + (a - v) / slope;
        const double t_switch = (below && b < a) ? t + (b - v) / slope : kInf;

        double t_end = t_hit;
        Event ev = Event::Exit;
        if (config.horizon_cap < t_end) {
            t_end = config.horizon_cap;
            ev = Event::Censor;
        }
        if (t_switch < t_end) {
            t_end = t_switch;
            ev = Event::Switch;
        }
        if (next_jump < t_end) {
            t_end = next_jump;
            ev = Event::Jump;
        }

        accrue(t, t_end, v, slope, below);
        v += slope * (t_end - t);
        t = t_end;

        switch (ev) {
            case Event::Exit:
                v = a;
                f.t_up = t;
                emit("exit");
                return f;
            case Event::Censor:
                f.t_up = t;
                f.censored = true;
                emit("censor");
                return f;
            case Event::Switch:
                v = b;
                emit("switch");
                break;
            case Event::Jump: {
                const int comp = sample_component(model, total_rate, rng);
                const double size = rng.exponential(model.jumps[comp].exp_rate);
                jump_sum += size;
                v -= size;
                if (v < 0.0) {
                    const double deficit = -v;
                    f.disc_R += std::exp(-q * t) * deficit;
                    raw_r += deficit;
                    v = 0.0;
                    emit("reflect");
                } else {
                    emit("jump");
                }
                next_jump = t + rng.exponential(total_rate);
                break;
            }
        }
    }
}

PathFunctionals euler_path(const ModelSpec& model, const SimConfig& config, CounterRng& rng,
                           const TraceSink* sink, int trace_stride) {
    const double h = config.step;
    const double b = model.b;
    const double a = config.a;
    const double q = config.q;
    const double delta = model.delta;
    const double sqh = model.sigma * std::sqrt(h);
    const double total_rate = model.total_jump_rate();
    const double jump_mean = total_rate * h;
    const double exp_neg_mean = std::exp(-jump_mean);
    const double decay = std::exp(-q * h);

    PathFunctionals f;
    double t = 0.0;
    double v = config.x0;
    double raw_l = 0.0, raw_r = 0.0, jump_sum = 0.0, brownian = 0.0;
    // midpoint discount factor for the current step
    double disc = std::exp(-q * h * 0.5);
    std::uint64_t step_index = 0;

    auto emit = [&](const char* event) {
        if (sink)
            (*sink)({t, v, raw_l, raw_r,
                     config.x0 + model.drift * t + brownian - jump_sum, event});
    };

    if (v < 0.0) {
        f.disc_R += -v;
        raw_r += -v;
        v = 0.0;
        emit("inject");
    }
    if (v >= a) {
        f.t_up = 0.0;
        emit("exit");
        return f;
    }
    emit("start");

    while (true) {
        const bool above = v > b;
        if (v < b) f.occ_below += h;
        if (above) {
            f.occ_above += h;
            f.disc_L += delta * h * disc;
            raw_l += delta * h;
        }
        if (config.band) {
            const auto [z1, z2] = *config.band;
            if (v >= z1 && v <= z2) f.band_mass += h * disc;
        }

        double incr = (model.drift - (above ? delta : 0.0)) * h;
        if (sqh > 0.0) {
            const double g = sqh * rng.normal();
            incr += g;
            brownian += g;
        }
        if (total_rate > 0.0) {
            const int k = rng.poisson(jump_mean, exp_neg_mean);
            for (int j = 0; j < k; ++j) {
                const int comp = sample_component(model, total_rate, rng);
                const double size = rng.exponential(model.jumps[comp].exp_rate);
                jump_sum += size;
                incr -= size;
            }
        }
        v += incr;
        t += h;
        ++step_index;
        if (v < 0.0) {
            const double deficit = -v;
            f.disc_R += deficit * disc;
            raw_r += deficit;
            v = 0.0;
            if (sink) emit("reflect");
        }
        if (v > a) {
            f.t_up = t;
            emit("exit");
            return f;
        }
        if (t >= config.horizon_cap) {
            f.t_up = t;
            f.censored = true;
            emit("censor");
            return f;
        }
        if (sink && trace_stride > 0 && step_index % static_cast<std::uint64_t>(trace_stride) == 0)
            emit("step");
        disc *= decay;
    }
}

struct Accumulator {
    static constexpr int kFunctionals = 7;
    double sum[kFunctionals] = {};
    double sumsq[kFunctionals] = {};
    std::uint64_t censored = 0;

    void add(const PathFunctionals& f, double q, double p) {
        const double values[kFunctionals] = {
            std::exp(-q * f.t_up),
            f.disc_L,
            f.disc_R,
            std::exp(-p * f.t_up - q * f.occ_below),
            std::exp(-p * f.t_up - q * f.occ_above),
            f.band_mass,
            f.t_up,
        };
        for (int i = 0; i < kFunctionals; ++i) {
            sum[i] += values[i];
            sumsq[i] += values[i] * values[i];
        }
        if (f.censored) ++censored;
    }

    void merge(const Accumulator& other) {
        for (int i = 0; i < kFunctionals; ++i) {
            sum[i] += other.sum[i];
            sumsq[i] += other.sumsq[i];
        }
        censored += other.censored;
    }
};

const char* kFunctionalNames[Accumulator::kFunctionals] = {
    "exit_lt", "disc_L", "disc_R", "occ_below_lt", "occ_above_lt", "band_mass", "t_up",
};

}  // namespace

void SimConfig::validate(const ModelSpec& model) const {
    model.validate();
    if (!(a > 0.0)) throw std::invalid_argument("sim config: a must be > 0");
    if (n_paths < 1) throw std::invalid_argument("sim config: n_paths must be >= 1");
    if (q < 0.0 || p < 0.0) throw std::invalid_argument("sim config: q and p must be >= 0");
    if (!(horizon_cap > 0.0)) throw std::invalid_argument("sim config: horizon_cap must be > 0");
    if (scheme == SimScheme::ExactBV && model.classify() != PathVariation::BoundedVariation)
        throw std::invalid_argument("sim config: exact_bv scheme requires sigma = 0");
    if (scheme == SimScheme::EulerApprox && !(step > 0.0))
        throw std::domain_error("sim config: Euler step must be > 0");
    if (band && !(band->second >= band->first))
        throw std::invalid_argument("sim config: band must satisfy z1 <= z2");
}

PathFunctionals simulate_path_exact_bv(const ModelSpec& model, const SimConfig& config,
                                       CounterRng& rng) {
    return exact_bv_path(model, config, rng, nullptr);
}

PathFunctionals simulate_path_euler(const ModelSpec& model, const SimConfig& config,
                                    CounterRng& rng) {
    if (!(config.step > 0.0)) throw std::domain_error("simulate_path_euler: step must be > 0");
    return euler_path(model, config, rng, nullptr, 0);
}

PathFunctionals simulate_path_exact_bv_observed(const ModelSpec& model, const SimConfig& config,
                                                CounterRng& rng, const PathObserver& observer) {
    return exact_bv_path(model, config, rng, &observer);
}

EstimateSet run_ensemble(const ModelSpec& model, const SimConfig& config) {
    config.validate(model);
    if (config.n_paths < 2) throw std::invalid_argument("run_ensemble: n_paths must be >= 2");

    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t n_blocks = (config.n_paths + kBlock - 1) / kBlock;
    std::vector<Accumulator> blocks(n_blocks);

    const bool exact = config.scheme == SimScheme::ExactBV;
    auto run_block = [&](std::uint64_t bi) {
        Accumulator acc;
        const std::uint64_t lo = bi * kBlock;
        const std::uint64_t hi = std::min(lo + kBlock, config.n_paths);
        for (std::uint64_t path = lo; path < hi; ++path) {
            CounterRng rng(config.seed, path);
            const PathFunctionals f = exact ? exact_bv_path(model, config, rng, nullptr)
                                            : euler_path(model, config, rng, nullptr, 0);
            acc.add(f, config.q, config.p);
        }
        blocks[bi] = acc;
    };

    unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                            : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_blocks));

    if (n_threads <= 1) {
        for (std::uint64_t bi = 0; bi < n_blocks; ++bi) run_block(bi);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (unsigned w = 0; w < n_threads; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const std::uint64_t bi = next.fetch_add(1);
                    if (bi >= n_blocks) break;
                    run_block(bi);
                }
            });
        }
        for (auto& th : workers) th.join();
    }

    // Deterministic reduction: blocks merged in index order.
    Accumulator total;
    for (const auto& blk : blocks) total.merge(blk);

    EstimateSet out;
    out.n_paths = config.n_paths;
    out.n_censored = total.censored;
    const double n = static_cast<double>(config.n_paths);
    for (int i = 0; i < Accumulator::kFunctionals; ++i) {
        Estimate e;
        e.mean = total.sum[i] / n;
        const double var = std::max(0.0, (total.sumsq[i] - n * e.mean * e.mean) / (n - 1.0));
        e.stddev = std::sqrt(var);
        e.stderr_of_mean = e.stddev / std::sqrt(n);
        out.estimates[kFunctionalNames[i]] = e;
    }
    return out;
}

void write_trace_csv(const ModelSpec& model, const SimConfig& config, int n_paths_to_trace,
                     std::ostream& os) {
    config.validate(model);
    os << "path,t,V,L,R,event\n";
    char buf[160];
    const int stride = std::max(1, static_cast<int>(std::llround(0.01 / config.step)));
    for (int path = 0; path < n_paths_to_trace; ++path) {
        TraceSink sink = [&](const PathEvent& row) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%s\n", path, row.t, row.v,
                          row.l, row.r, row.event);
            os << buf;
        };
        CounterRng rng(config.seed, static_cast<std::uint64_t>(path));
        if (config.scheme == SimScheme::ExactBV) {
            exact_bv_path(model, config, rng, &sink);
        } else {
            euler_path(model, config, rng, &sink, stride);
        }
    }
}

}  // namespace rrlevy
