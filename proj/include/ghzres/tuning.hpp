// Analytic optimal-rate formulas, predicted-error models and log-grid
// numerical optimization of the steady-state error over rate sets.
#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ghzres/catalog.hpp"
#include "ghzres/qutrit_chain.hpp"
#include "ghzres/signal_chain.hpp"
#include "ghzres/steady_state.hpp"

namespace ghzres {

struct TuningRatios {
    double eps = 0.0;   // kappa_u / kappa_st
    double eps_p = 0.0; // kappa_p / kappa_u
    double eps1 = 0.0;  // max(kappa_t, kappa_u) / kappa_d
    double eps2 = 0.0;  // kappa_d / kappa_st
    double gamma = 0.0; // kappa_c / kappa_st

    static TuningRatios from(const RateSet& r) {
        TuningRatios t;
        t.eps = r.kappa_u / r.kappa_st;
        t.eps_p = r.kappa_p / r.kappa_u;
        t.eps1 = std::max(r.kappa_t, r.kappa_u) / r.kappa_d;
        t.eps2 = r.kappa_d / r.kappa_st;
        t.gamma = r.kappa_c / r.kappa_st;
        return t;
    }
};

enum class WaveEstimate { MethodA, MethodB };

/// Optimal kappa_u for the qutrit wave at kappa_st = kappa_c, by either
/// fidelity estimate; returns the filled rate set and the predicted error.
inline std::pair<RateSet, double> optimal_rates_qutrit_wave(int n, double kappa_c, double kappa_p,
                                                            WaveEstimate estimate) {
    if (!(kappa_c > kappa_p && kappa_p > 0))
        throw std::invalid_argument("need kappa_c > kappa_p > 0");
    RateSet r;
    r.kappa_c = r.kappa_st = kappa_c;
    r.kappa_p = kappa_p;
    double eps, predicted;
    if (estimate == WaveEstimate::MethodA) {
        eps = std::sqrt(n * kappa_p / ((2.0 * n - 1.0) * kappa_c));
        predicted = 2.0 * std::sqrt(n * (2.0 * n - 1.0) * kappa_p / kappa_c);
    } else {
        eps = std::sqrt(kappa_p / kappa_c);
        predicted = 2.0 * n * std::sqrt(kappa_p / kappa_c);
    }
    r.kappa_u = eps * kappa_c;
    return {r, predicted};
}

struct PredictedError {
    double error = 0.0;
    bool regime_ok = true; // false once correction terms sum past 0.5
};

/// Formula-level error prediction per scheme; clamped at 0 with a flag when
/// the asymptotic regime is violated.
inline PredictedError predicted_error(SchemeId scheme, int n, const RateSet& rates) {
    double raw;
    switch (scheme) {
        case SchemeId::StateCond:
        case SchemeId::StateCondTripartite:
            raw = 1.0 - llp_leading_order(n, rates);
            break;
        case SchemeId::QutritWave: {
            const double eps = rates.kappa_u / rates.kappa_st;
            const double eps_p = rates.kappa_p / rates.kappa_u;
            const double gamma = rates.kappa_c / rates.kappa_st;
            raw = n * eps_p + n * eps;
            if (gamma < 1.0) raw += (n - 1.0) * eps / gamma - (n - 1.0) * eps;
            break;
        }
        default:
            throw std::invalid_argument("no analytic error model for this scheme");
    }
    PredictedError out;
    out.regime_ok = raw <= 0.5 && raw >= 0.0;
    out.error = std::min(std::max(raw, 0.0), 1.0);
    return out;
}

enum class TuneObjective { FullSolve, MarkovEstimate };

struct GridPoint {
    RateSet rates;
    double error = 1.0;
    bool ok = false;
    std::string status; // "ok" or the failure reason
};

struct TuneResult {
    RateSet best;
    double best_error = 1.0;
    TuneObjective objective = TuneObjective::FullSolve;
    std::vector<GridPoint> surface;
    long failures = 0;
};

struct GridAxis {
    std::string rate; // kappa_u, kappa_d, kappa_t, kappa_c, kappa_st, kappa_r
    double log10_min = 0.0;
    double log10_max = 0.0;
    int points = 13;
};

namespace tuning_detail {

inline double& rate_field(RateSet& r, const std::string& name) {
    if (name == "kappa_u") return r.kappa_u;
    if (name == "kappa_d") return r.kappa_d;
    if (name == "kappa_t") return r.kappa_t;
    if (name == "kappa_st") return r.kappa_st;
    if (name == "kappa_r") return r.kappa_r;
    if (name == "kappa_c") return r.kappa_c;
    if (name == "kappa_f") return r.kappa_f;
    if (name == "kappa_p") return r.kappa_p;
    throw std::invalid_argument("unknown rate name: " + name);
}

inline std::vector<double> rate_tuple(const RateSet& r) {
    return {r.kappa_u, r.kappa_d, r.kappa_t, r.kappa_st, r.kappa_r,
            r.kappa_c, r.kappa_f, r.kappa_x, r.kappa_z, r.kappa_p};
}

inline double markov_error(SchemeId scheme, int n, const RateSet& rates) {
    switch (scheme) {
        case SchemeId::QutritWave: return 1.0 - ghz_estimate_method2(n, rates);
        case SchemeId::StateCond:
        case SchemeId::StateCondTripartite: return 1.0 - llp_exact(n, rates).p_ghz_total;
        default: throw std::invalid_argument("no Markov estimate for this scheme");
    }
}

inline double full_solve_error(SchemeId scheme, int n, const RateSet& rates,
                               const SolverConfig& config) {
    ReservoirSpec spec = build_scheme(scheme, n, rates);
    const ErrorModel model =
        scheme == SchemeId::QutritWave ? ErrorModel::QutritDepolarizing : ErrorModel::QubitFlips;
    auto errs = build_error_channels(spec.layout, rates, model);
    auto rep = solve_steady_state(spec, errs, config);
    return 1.0 - rep.ghz_fidelity;
}

} // namespace tuning_detail

/// Exhaustive log-grid optimization. Points are evaluated by a worker pool;
/// the argmin is deterministic regardless of evaluation order (ties broken by
/// the lexicographically smallest rate tuple).
inline TuneResult grid_search(SchemeId scheme, int n, const RateSet& fixed,
                              const std::vector<GridAxis>& axes, TuneObjective objective,
                              const SolverConfig& solver = {}, int workers = 0) {
    long total = 1;
    for (const auto& a : axes) {
        if (a.points < 1) throw std::invalid_argument("grid axis needs >= 1 point");
        total *= a.points;
    }
    if (total > 10000) throw std::invalid_argument("grid exceeds the 1e4 point cap");

    std::vector<RateSet> points(total, fixed);
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        for (const auto& a : axes) {
            const int i = static_cast<int>(rem % a.points);
            rem /= a.points;
            const double t = a.points == 1
                                 ? a.log10_min
                                 : a.log10_min + (a.log10_max - a.log10_min) * i / (a.points - 1.0);
            tuning_detail::rate_field(points[idx], a.rate) = std::pow(10.0, t);
        }
    }

    TuneResult result;
    result.objective = objective;
    result.surface.resize(total);
    std::atomic<long> next{0};
    auto worker = [&] {
        for (;;) {
            const long idx = next.fetch_add(1);
            if (idx >= total) return;
            GridPoint& gp = result.surface[idx];
            gp.rates = points[idx];
            try {
                gp.error = objective == TuneObjective::FullSolve
                               ? tuning_detail::full_solve_error(scheme, n, points[idx], solver)
                               : tuning_detail::markov_error(scheme, n, points[idx]);
                gp.ok = true;
                gp.status = "ok";
            } catch (const std::exception& e) {
                gp.ok = false;
                gp.status = e.what();
            }
        }
    };
    int nw = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    nw = std::max(1, static_cast<int>(std::min<long>(nw, total)));
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    bool found = false;
    for (const auto& gp : result.surface) {
        if (!gp.ok) {
            ++result.failures;
            continue;
        }
        if (!found || gp.error < result.best_error ||
            (gp.error == result.best_error &&
             tuning_detail::rate_tuple(gp.rates) < tuning_detail::rate_tuple(result.best))) {
            result.best = gp.rates;
            result.best_error = gp.error;
            found = true;
        }
    }
    if (!found) throw std::runtime_error("grid search failed at every point");
    return result;
}

} // namespace ghzres
