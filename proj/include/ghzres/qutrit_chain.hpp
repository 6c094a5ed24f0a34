// Classical chains for the qutrit-wave scheme: the exact {logical,2}^n
// aggregate, the sequential (two-consecutive-waves) chain with its product
// closed form, and the concurrent-wave lattice behind the crossing rate.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <map>
#include <string>
#include <vector>

#include "ghzres/ctmc.hpp"
#include "ghzres/rates.hpp"

namespace ghzres {

/// Exact autonomous chain on words over {l, 2}: site 1 excites at kappa_u,
/// de-excitation propagates |2,l> -> |l,2> and leaves at site n, kappa_st.
inline CtmcModel build_qutrit_aggregate_chain(int n, const RateSet& rates) {
    if (n < 1) throw std::invalid_argument("n >= 1 required");
    if (n > 20) throw std::length_error("aggregate chain state space exceeds cap");
    rates.validate();
    std::vector<std::string> words{""};
    for (int k = 0; k < n; ++k) {
        std::vector<std::string> next;
        for (const auto& w : words) {
            next.push_back(w + 'l');
            next.push_back(w + '2');
        }
        words = std::move(next);
    }
    CtmcBuilder b(words);
    for (const auto& w : words) {
        if (w[0] == 'l') {
            std::string t = w;
            t[0] = '2';
            b.add_rate(w, t, rates.kappa_u);
        }
        if (w[n - 1] == '2') {
            std::string t = w;
            t[n - 1] = 'l';
            b.add_rate(w, t, rates.kappa_st);
        }
        // both (2,l) -> (l,2) and, through the v channel, (2,2) -> (l,2)
        for (int k = 1; k < n; ++k)
            if (w[k - 1] == '2') {
                std::string t = w;
                t[k - 1] = 'l';
                t[k] = '2';
                b.add_rate(w, t, rates.kappa_st);
            }
    }
    return b.build();
}

/// Sequential analysis chain U -> R_1..R_n -> G_1..G_{n-1}=GHZ with error sink
/// E; returns the chain together with its exact product closed form for the
/// GHZ population (total error rate n*kappa_p from every live configuration).
inline std::pair<CtmcModel, double> build_qutrit_sequential_chain(int n, const RateSet& rates) {
    if (n < 2) throw std::invalid_argument("n >= 2 required");
    rates.validate();
    const double ku = rates.kappa_u, kst = rates.kappa_st, kc = rates.kappa_c;
    const double ep = n * rates.kappa_p; // total perturbation detection rate

    std::vector<std::string> states{"U"};
    for (int k = 1; k <= n; ++k) states.push_back("R" + std::to_string(k));
    for (int k = 1; k <= n - 2; ++k) states.push_back("G" + std::to_string(k));
    states.push_back("GHZ");
    states.push_back("E");
    CtmcBuilder b(states);

    auto restart = [&](const std::string& s) {
        b.add_rate(s, "U", ku);
        b.add_rate(s, "E", ep);
    };
    b.add_rate("U", "R1", kst);
    b.add_rate("U", "E", ep);
    for (int k = 1; k < n; ++k) {
        restart("R" + std::to_string(k));
        b.add_rate("R" + std::to_string(k), "R" + std::to_string(k + 1), kst);
    }
    restart("R" + std::to_string(n));
    b.add_rate("R" + std::to_string(n), n == 2 ? "GHZ" : "G1", kc);
    for (int k = 1; k <= n - 2; ++k) {
        const std::string g = "G" + std::to_string(k);
        restart(g);
        b.add_rate(g, k == n - 2 ? "GHZ" : "G" + std::to_string(k + 1), kc);
    }
    restart("GHZ");
    b.add_rate("E", "U", ku);

    const double x = ep + ku;
    const double closed = std::pow(kst / (x + kst), n) * std::pow(kc / (x + kc), n - 1) * ku / x;
    return {b.build(), closed};
}

struct LatticeReport {
    double kappa_rmu = 0.0;
    double denominator = 0.0;               // exact dyadic rational, n + 1 + sum
    std::int64_t denom_num = 0, denom_den = 1; // same value as an exact fraction
    std::vector<std::vector<double>> relative_population; // p(j,k)/p(0,0) for k<=n-2
    bool consistency_ok = false;             // recursion reproduces p(n-2,n-1)=p(0,0)
};

/// Effective rate whose inverse is the expected time to cross the concurrent
/// reset/L lattice: kappa_st / (n + 1 + sum_j C(2j-1, j-1) / 2^(2j-1)).
inline LatticeReport lattice_crossing_rate(int n, double kappa_st) {
    if (n < 2) throw std::invalid_argument("n >= 2 required");
    detail::require_positive(kappa_st, "kappa_st");
    LatticeReport rep;

    // exact dyadic arithmetic for the denominator (n + 1) + sum of C/2^(2j-1)
    std::int64_t num = n + 1, den = 1;
    for (int j = 1; j <= n - 2; ++j) {
        std::int64_t c = 1; // C(2j-1, j-1)
        for (int i = 0; i < j - 1; ++i) c = c * (2 * j - 1 - i) / (i + 1);
        const std::int64_t p = std::int64_t(1) << (2 * j - 1);
        num = num * p + c * den;
        den *= p;
        const std::int64_t g = std::gcd(num, den);
        num /= g;
        den /= g;
    }
    rep.denom_num = num;
    rep.denom_den = den;
    rep.denominator = static_cast<double>(num) / static_cast<double>(den);
    rep.kappa_rmu = kappa_st / rep.denominator;

    // closed-form relative populations on the open lattice rows, and the
    // boundary recursion reproducing p(n-2, n-1) = p(0,0)
    auto binom = [](int a, int b) {
        double r = 1;
        for (int i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
        return r;
    };
    rep.relative_population.assign(n, {});
    for (int j = 0; j <= n - 2; ++j)
        for (int k = j; k <= n - 2; ++k)
            rep.relative_population[j].push_back(binom(j + k, j) / std::pow(2.0, j + k));
    std::vector<double> last(n, 0.0); // column k = n-1
    last[0] = (n >= 2) ? binom(n - 2, 0) / std::pow(2.0, n - 2) : 1.0;
    for (int j = 1; j <= n - 2; ++j)
        last[j] = last[j - 1] + rep.relative_population[j][n - 2 - j];
    rep.consistency_ok = std::abs(last[n - 2] - 1.0) < 1e-12;
    return rep;
}

/// Second wave estimate: p = 1 / ((1 + n eps_p)(1 + et + n eps_p et)) with
/// eps_p = kappa_p/kappa_u and et = kappa_u/kappa_Rmu.
inline double ghz_estimate_method2(int n, const RateSet& rates) {
    const double eps_p = rates.kappa_p / rates.kappa_u;
    const double et = rates.kappa_u / lattice_crossing_rate(n, rates.kappa_st).kappa_rmu;
    return 1.0 / ((1.0 + n * eps_p) * (1.0 + et + n * eps_p * et));
}

/// Full wave chain: U, E and the lattice nodes {j1+, j2 L} with j2 < j1.
/// Reset advance at kappa_st, L advance at kappa_c (needs j2 <= j1 - 2),
/// perturbations at n*kappa_p into E, restarts at kappa_u into U.
inline CtmcModel build_qutrit_wave_chain_full(int n, const RateSet& rates) {
    if (n < 2) throw std::invalid_argument("n >= 2 required");
    rates.validate();
    const double ku = rates.kappa_u, kst = rates.kappa_st, kc = rates.kappa_c;
    const double ep = n * rates.kappa_p;

    auto name = [n](int j1, int j2) {
        if (j1 == n && j2 == n - 1) return std::string("GHZ");
        return "{" + std::to_string(j1) + "+," + std::to_string(j2) + "L}";
    };
    std::vector<std::string> states{"U"};
    for (int j1 = 1; j1 <= n; ++j1)
        for (int j2 = 0; j2 < j1 && j2 <= n - 1; ++j2) states.push_back(name(j1, j2));
    states.push_back("E");
    CtmcBuilder b(states);

    b.add_rate("U", name(1, 0), kst);
    b.add_rate("U", "E", ep);
    for (int j1 = 1; j1 <= n; ++j1)
        for (int j2 = 0; j2 < j1; ++j2) {
            const std::string s = name(j1, j2);
            b.add_rate(s, "E", ep);
            b.add_rate(s, "U", ku);
            if (j1 < n) b.add_rate(s, name(j1 + 1, j2), kst);
            if (j2 + 2 <= j1) b.add_rate(s, name(j1, j2 + 1), kc);
        }
    b.add_rate("E", "U", ku);
    return b.build();
}

} // namespace ghzres
