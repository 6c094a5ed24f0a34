// Reduced Markov chain over grouped jump-detection outputs for the
// state-conditioning scheme, its exact algebraic solution, leading-order
// fidelity estimates and the analytic optimal-rate settings.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ghzres/ctmc.hpp"
#include "ghzres/rates.hpp"

namespace ghzres {

/// Summarized clock rate for the merged {all-g, all-m} sector.
inline double effective_up_rate(const RateSet& rates) {
    return 1.0 / (1.0 / rates.kappa_u + 1.0 / rates.kappa_t);
}

namespace signal_detail {

inline std::string rlabel(int k, bool esector) { return "R" + std::to_string(k) + (esector ? "^e" : "^mg"); }
inline std::string glabel(int k, bool esector) { return "G" + std::to_string(k) + (esector ? "^e" : "^mg"); }
inline std::string ghzlabel(bool esector) { return std::string("GHZ") + (esector ? "^e" : "^mg"); }
inline std::string elabel(bool esector) { return std::string("E") + (esector ? "^e" : "^mg"); }

} // namespace signal_detail

/// Chain over configurations {R_1..R_n, G_0..G_{n-2}, GHZ, E} x {e, mg}.
/// Resets fire only in the e sector; detections {kL} from partially reset
/// configurations are failures, from R_n they split G_1 / G_0.
inline CtmcModel build_reduced_state_cond_chain(int n, const RateSet& rates) {
    if (n < 3) throw std::invalid_argument("reduced chain defined for n >= 3");
    rates.validate();
    const double ktu = effective_up_rate(rates);
    const double kd = rates.kappa_d, kr = rates.kappa_r, kc = rates.kappa_c, kp = rates.kappa_p;

    using namespace signal_detail;
    std::vector<std::string> states;
    for (bool e : {true, false}) {
        for (int k = 1; k <= n; ++k) states.push_back(rlabel(k, e));
        for (int k = 0; k <= n - 2; ++k) states.push_back(glabel(k, e));
        states.push_back(ghzlabel(e));
        states.push_back(elabel(e));
    }
    CtmcBuilder b(states);

    auto clock_pair = [&](const std::string& base_e, const std::string& base_mg) {
        b.add_rate(base_e, base_mg, n * kd);
        b.add_rate(base_mg, base_e, n * ktu);
    };
    for (int k = 1; k <= n; ++k) clock_pair(rlabel(k, true), rlabel(k, false));
    for (int k = 0; k <= n - 2; ++k) clock_pair(glabel(k, true), glabel(k, false));
    clock_pair(ghzlabel(true), ghzlabel(false));
    clock_pair(elabel(true), elabel(false));

    for (bool e : {true, false}) {
        // perturbations
        for (int k = 1; k <= n; ++k) b.add_rate(rlabel(k, e), elabel(e), n * kp);
        for (int k = 0; k <= n - 2; ++k) b.add_rate(glabel(k, e), elabel(e), n * kp);
        b.add_rate(ghzlabel(e), elabel(e), n * kp);
        // {kL} detections
        for (int k = 1; k < n; ++k) b.add_rate(rlabel(k, e), elabel(e), (n - 1) * kc);
        b.add_rate(rlabel(n, e), glabel(1, e), kc);
        b.add_rate(rlabel(n, e), glabel(0, e), (n - 2) * kc);
        for (int k = 0; k < n - 2; ++k) b.add_rate(glabel(k, e), glabel(k + 1, e), kc);
        b.add_rate(glabel(n - 2, e), ghzlabel(e), kc);
    }
    // resets, e sector only
    for (int k = 1; k < n; ++k) b.add_rate(rlabel(k, true), rlabel(k + 1, true), (n - k) * kr);
    for (int k = 0; k <= n - 2; ++k) b.add_rate(glabel(k, true), rlabel(1, true), n * kr);
    b.add_rate(ghzlabel(true), rlabel(1, true), n * kr);
    b.add_rate(elabel(true), rlabel(1, true), n * kr);
    return b.build();
}

struct LlpReport {
    double p_ghz_total = 0.0;
    std::map<std::string, double> populations;
};

/// Exact steady state of the reduced chain by the explicit recursions:
/// sector marginal, the R-ladder product formula, the G-pair recursion and
/// the final GHZ balance.
inline LlpReport llp_exact(int n, const RateSet& rates) {
    if (n < 3) throw std::invalid_argument("llp recursions defined for n >= 3");
    const double ktu = effective_up_rate(rates);
    const double kd = rates.kappa_d, kr = rates.kappa_r, kc = rates.kappa_c, kp = rates.kappa_p;

    const double pe = ktu / (ktu + kd);
    const double a0 =
        n * kp + (n - 1) * kc +
        n * kd * (kp + (n - 1.0) / n * kc) / (kp + (n - 1.0) / n * kc + ktu);

    // p_{R_n^e} = p_e / (1 + sum_j prod_{i<j}(a0 + i kr) / (j! kr^j))
    std::vector<double> ladder{1.0};
    double term = 1.0, denom = 1.0;
    for (int j = 1; j <= n; ++j) {
        term *= (a0 + (j - 1) * kr) / (j * kr);
        ladder.push_back(term);
        denom += term;
    }
    const double pRn_e = pe / denom;

    LlpReport rep;
    using namespace signal_detail;
    const double mg_ratio = kd / (kp + ktu + (n - 1.0) / n * kc);
    for (int k = 1; k <= n; ++k) {
        const double pk = ladder[n - k] * pRn_e;
        rep.populations[rlabel(k, true)] = pk;
        rep.populations[rlabel(k, false)] = mg_ratio * pk;
    }

    const double b0 = n * kp + kc + n * kr;
    const double b1 = n * kp + n * ktu * b0 / (b0 + n * kd) + kc;
    double src_mg = (n - 2.0) * rep.populations[rlabel(n, false)];
    double src_e = (n - 2.0) * rep.populations[rlabel(n, true)];
    for (int k = 0; k <= n - 2; ++k) {
        const double gmg = (kc * src_mg + n * kd / (b0 + n * kd) * kc * src_e) / b1;
        const double ge = (n * ktu * gmg + kc * src_e) / (b0 + n * kd);
        rep.populations[glabel(k, false)] = gmg;
        rep.populations[glabel(k, true)] = ge;
        if (k == 0) {
            src_mg = gmg + rep.populations[rlabel(n, false)];
            src_e = ge + rep.populations[rlabel(n, true)];
        } else {
            src_mg = gmg;
            src_e = ge;
        }
    }
    const double lhs = n * kp + n * ktu * (kr + kp) / (kr + kp + kd);
    const double pGHZmg = (kc * rep.populations[glabel(n - 2, false)] +
                           kd / (kd + kr + kp) * kc * rep.populations[glabel(n - 2, true)]) /
                          lhs;
    const double pGHZe =
        (kc * rep.populations[glabel(n - 2, true)] + n * ktu * pGHZmg) / (n * (kp + kd + kr));
    rep.populations[ghzlabel(false)] = pGHZmg;
    rep.populations[ghzlabel(true)] = pGHZe;

    double sum_e = pGHZe, sum_mg = pGHZmg;
    for (int k = 1; k <= n; ++k) {
        sum_e += rep.populations[rlabel(k, true)];
        sum_mg += rep.populations[rlabel(k, false)];
    }
    for (int k = 0; k <= n - 2; ++k) {
        sum_e += rep.populations[glabel(k, true)];
        sum_mg += rep.populations[glabel(k, false)];
    }
    rep.populations[elabel(true)] = pe - sum_e;
    rep.populations[elabel(false)] = (1.0 - pe) - sum_mg;
    rep.p_ghz_total = pGHZmg + pGHZe;
    return rep;
}

/// Leading-order GHZ population (Proposition-2 style estimate).
inline double llp_leading_order(int n, const RateSet& rates) {
    const double ktu = effective_up_rate(rates);
    return 1.0 - rates.kappa_p / ktu - n * (n - 1.0) * ktu / rates.kappa_c - ktu / rates.kappa_d -
           n * std::log(static_cast<double>(n)) * (rates.kappa_c + rates.kappa_d) / rates.kappa_r;
}

/// Analytic best setting for the state-conditioning scheme given the fastest
/// achievable rate kappa_r and the perturbation rate kappa_p. The summarized
/// up-rate is split evenly (kappa_u = kappa_t = 2 ktu); kappa_st = kappa_r.
inline std::pair<RateSet, double> optimal_rates_state_cond(int n, double kappa_r, double kappa_p) {
    detail::require_positive(kappa_r, "kappa_r");
    detail::require_positive(kappa_p, "kappa_p");
    if (n < 2) throw std::invalid_argument("n >= 2 required");
    const double ratio = kappa_r / kappa_p;
    const double ln = std::log(static_cast<double>(n));
    RateSet r;
    r.kappa_p = kappa_p;
    r.kappa_x = r.kappa_z = kappa_p / 2.0;
    r.kappa_r = kappa_r;
    r.kappa_st = kappa_r;
    const double ktu = kappa_p * std::cbrt(ratio) / (std::pow(n, 2.0 / 3.0) * std::cbrt(ln));
    r.kappa_u = r.kappa_t = 2.0 * ktu;
    r.kappa_d = kappa_p * std::pow(ratio, 2.0 / 3.0) / (std::pow(n, 5.0 / 6.0) * std::pow(ln, 2.0 / 3.0));
    r.kappa_c = kappa_p * std::pow(ratio, 2.0 / 3.0) * std::pow(n, 1.0 / 6.0) / std::pow(ln, 2.0 / 3.0);
    const double predicted = std::cbrt(std::pow(n, 3.5) * ln * kappa_p / kappa_r);
    return {r, predicted};
}

struct SyncCorrection {
    double p_ghz = 0.0;
    double kappa_hat_u = 0.0;
};

/// First-order effect of imperfect ancilla synchronization: the reset-period
/// loss n ln(n)/kappa_r grows by (n-1)/(eta2 kappa_st); also the adjusted
/// summarized rate kappa_hat_u.
inline SyncCorrection imperfect_sync_correction(int n, const RateSet& rates, double eta2 = 1.0) {
    const double ktu = effective_up_rate(rates);
    const double n0 = n - 1.0;
    const double es = eta2 * rates.kappa_st;
    SyncCorrection out;
    out.kappa_hat_u = n * rates.kappa_u * rates.kappa_t * es /
                      (n * rates.kappa_u * (es + n0 * rates.kappa_u + n * rates.kappa_t) +
                       es * n * rates.kappa_t);
    out.p_ghz = 1.0 - rates.kappa_p / ktu - n * (n - 1.0) * ktu / rates.kappa_c -
                ktu / rates.kappa_d -
                (rates.kappa_c + rates.kappa_d) *
                    (n * std::log(static_cast<double>(n)) / rates.kappa_r + n0 / es);
    return out;
}

} // namespace ghzres
