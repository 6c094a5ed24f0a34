// The ancilla clock reduced to a classical chain over level words, the
// frontier machinery, and the principal-population closed forms.
#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ghzres/ctmc.hpp"
#include "ghzres/rates.hpp"

namespace ghzres {

enum class ClockVariant { ThreeLevel, FourLevelJumpCond };

namespace clock_detail {

inline const std::string& alphabet(ClockVariant v) {
    static const std::string three = "gem";
    static const std::string four = "gfem";
    return v == ClockVariant::ThreeLevel ? three : four;
}

// cyclic successor within the synchronization cycle g -> e -> m -> g;
// the four-level clock interposes f between g and e.
inline char cycle_next(char c, ClockVariant v) {
    if (v == ClockVariant::ThreeLevel) {
        switch (c) {
            case 'g': return 'e';
            case 'e': return 'm';
            default: return 'g';
        }
    }
    switch (c) {
        case 'g': return 'f';
        case 'f': return 'e';
        case 'e': return 'm';
        default: return 'g';
    }
}

inline std::vector<std::string> all_words(int n, ClockVariant v) {
    const std::string& al = alphabet(v);
    std::vector<std::string> words{""};
    for (int k = 0; k < n; ++k) {
        std::vector<std::string> next;
        next.reserve(words.size() * al.size());
        for (const auto& w : words)
            for (char c : al) next.push_back(w + c);
        words = std::move(next);
    }
    return words;
}

} // namespace clock_detail

/// Number of adjacent unequal ancilla pairs; for the four-level clock the
/// pairs (f,e) and (e,f) do not count.
inline int frontier_count(const std::string& word, ClockVariant v = ClockVariant::ThreeLevel) {
    int c = 0;
    for (size_t k = 0; k + 1 < word.size(); ++k) {
        const char a = word[k], b = word[k + 1];
        if (a == b) continue;
        if (v == ClockVariant::FourLevelJumpCond &&
            ((a == 'f' && b == 'e') || (a == 'e' && b == 'f')))
            continue;
        ++c;
    }
    return c;
}

/// Exact clock generator over all level words.
inline CtmcModel build_ancilla_clock_ctmc(int n, const RateSet& rates,
                                          ClockVariant variant = ClockVariant::ThreeLevel) {
    if (n < 1) throw std::invalid_argument("n >= 1 required");
    const double states_d = std::pow(static_cast<double>(clock_detail::alphabet(variant).size()), n);
    if (states_d > 600000.0) throw std::length_error("clock state space exceeds cap");
    rates.validate();

    auto words = clock_detail::all_words(n, variant);
    CtmcBuilder b(words);
    const bool four = variant == ClockVariant::FourLevelJumpCond;

    auto spontaneous_rate = [&](char from) -> double {
        if (!four) {
            switch (from) {
                case 'g': return rates.kappa_u;
                case 'e': return rates.kappa_d;
                default: return rates.kappa_t;
            }
        }
        switch (from) {
            case 'g': return rates.kappa_u;
            case 'f': return rates.kappa_f;
            case 'e': return rates.kappa_d;
            default: return rates.kappa_t;
        }
    };

    for (long i = 0; i < static_cast<long>(words.size()); ++i) {
        const std::string& w = words[i];
        // spontaneous jumps, one per ancilla
        for (int k = 0; k < n; ++k) {
            std::string t = w;
            t[k] = clock_detail::cycle_next(w[k], variant);
            b.add_rate(w, t, spontaneous_rate(w[k]));
        }
        // neighbor-stimulated jumps
        for (int k = 0; k + 1 < n; ++k) {
            const char a = w[k], c = w[k + 1];
            if (!four) {
                if (clock_detail::cycle_next(a, variant) == c) {
                    std::string t = w;
                    t[k] = c;
                    b.add_rate(w, t, rates.kappa_st);
                }
                if (clock_detail::cycle_next(c, variant) == a) {
                    std::string t = w;
                    t[k + 1] = a;
                    b.add_rate(w, t, rates.kappa_st);
                }
            } else {
                // st1: (g,f)->(f,f), (e,m)->(m,m), (m,g)->(g,g); st2: (g,e)->(f,e)
                auto stim_target = [](char self, char nb) -> char {
                    if (self == 'g' && (nb == 'f' || nb == 'e')) return 'f';
                    if (self == 'e' && nb == 'm') return 'm';
                    if (self == 'm' && nb == 'g') return 'g';
                    return 0;
                };
                if (char t1 = stim_target(a, c)) {
                    std::string t = w;
                    t[k] = t1;
                    b.add_rate(w, t, rates.kappa_st);
                }
                if (char t2 = stim_target(c, a)) {
                    std::string t = w;
                    t[k + 1] = t2;
                    b.add_rate(w, t, rates.kappa_st);
                }
            }
        }
    }
    return b.build();
}

/// Stationary populations of the three synchronized words (all-g, all-e, all-m)
/// in the fast-stimulation limit.
inline std::array<double, 3> principal_populations_formula(const RateSet& rates) {
    const double ku = rates.kappa_u, kd = rates.kappa_d, kt = rates.kappa_t;
    const double pg = 1.0 / (1.0 + ku / kd + ku / kt);
    const double pe = 1.0 / (1.0 + kd / kt + kd / ku);
    const double pm = 1.0 / (1.0 + kt / ku + kt / kd);
    return {pg, pe, pm};
}

/// Upper bound on the steady-state mass outside the three principal words.
inline double off_principal_bound(int n, double eps1, double eps2) {
    if (n <= 1) return 0.0;
    return 0.75 * (n - 1) * (1.5 * n + 1.0) * eps1 * eps2;
}

struct FrontierReport {
    bool all_absorbed = true;
    bool monotone = true;
    int max_steps = 0;
    long trials = 0;
};

namespace clock_detail {

/// Enabled fast jumps from a word: stimulated attraction to a neighbor's
/// cycle-successor level, plus (four-level) the spontaneous f -> e relaxation.
inline std::vector<std::string> fast_successors(const std::string& w, ClockVariant v) {
    std::vector<std::string> out;
    const int n = static_cast<int>(w.size());
    const bool four = v == ClockVariant::FourLevelJumpCond;
    for (int k = 0; k + 1 < n; ++k) {
        const char a = w[k], c = w[k + 1];
        if (!four) {
            if (cycle_next(a, v) == c) {
                std::string t = w;
                t[k] = c;
                out.push_back(t);
            }
            if (cycle_next(c, v) == a) {
                std::string t = w;
                t[k + 1] = a;
                out.push_back(t);
            }
        } else {
            auto stim_target = [](char self, char nb) -> char {
                if (self == 'g' && (nb == 'f' || nb == 'e')) return 'f';
                if (self == 'e' && nb == 'm') return 'm';
                if (self == 'm' && nb == 'g') return 'g';
                return 0;
            };
            if (char t1 = stim_target(a, c)) {
                std::string t = w;
                t[k] = t1;
                out.push_back(t);
            }
            if (char t2 = stim_target(c, a)) {
                std::string t = w;
                t[k + 1] = t2;
                out.push_back(t);
            }
        }
    }
    if (four)
        for (int k = 0; k < n; ++k)
            if (w[k] == 'f') {
                std::string t = w;
                t[k] = 'e';
                out.push_back(t);
            }
    return out;
}

} // namespace clock_detail

/// Simulates the stimulated-only jump process from `start` until no fast jump
/// remains; checks the frontier count never increases.
inline bool frontier_trajectory(std::string start, std::mt19937_64& rng, long step_cap,
                                ClockVariant v, int& steps_out, bool& monotone_out) {
    int fc = frontier_count(start, v);
    long steps = 0;
    monotone_out = true;
    while (steps < step_cap) {
        auto succ = clock_detail::fast_successors(start, v);
        if (succ.empty()) break;
        std::uniform_int_distribution<size_t> pick(0, succ.size() - 1);
        start = succ[pick(rng)];
        const int nf = frontier_count(start, v);
        if (nf > fc) monotone_out = false;
        fc = nf;
        ++steps;
    }
    steps_out = static_cast<int>(steps);
    // absorbed iff no fast jump is enabled anymore and the word is synchronized
    return clock_detail::fast_successors(start, v).empty() && fc == 0;
}

inline FrontierReport verify_frontier_convergence(int n, long trials, std::uint64_t seed,
                                                  ClockVariant v = ClockVariant::ThreeLevel) {
    FrontierReport rep;
    rep.trials = trials;
    std::mt19937_64 rng(seed);
    const std::string& al = clock_detail::alphabet(v);
    std::uniform_int_distribution<int> letter(0, static_cast<int>(al.size()) - 1);
    const long cap = 10L * n * static_cast<long>(std::pow(static_cast<double>(al.size()), n));
    for (long t = 0; t < trials; ++t) {
        std::string w(n, 'g');
        for (int k = 0; k < n; ++k) w[k] = al[letter(rng)];
        int steps = 0;
        bool mono = true;
        const bool absorbed = frontier_trajectory(w, rng, cap, v, steps, mono);
        rep.all_absorbed &= absorbed;
        rep.monotone &= mono;
        rep.max_steps = std::max(rep.max_steps, steps);
    }
    return rep;
}

} // namespace ghzres
