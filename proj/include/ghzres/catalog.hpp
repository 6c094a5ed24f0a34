// Reservoir catalog: labeled collapse-operator sets for every stabilization
// scheme, parameterized by chain length and a RateSet. Builders are pure;
// outputs are immutable value types.
#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ghzres/core.hpp"
#include "ghzres/lindblad.hpp"
#include "ghzres/rates.hpp"

namespace ghzres {

enum class SchemeId {
    LtvOnly,
    IdealClock,
    StateCond,
    StateCondTripartite,
    JumpCondPrelim,
    JumpCondBipartite,
    WaveTriJump,
    WaveTriQubitAncilla,
    WaveBipartite,
    QutritWave,
};

inline const char* scheme_name(SchemeId s) {
    switch (s) {
        case SchemeId::LtvOnly: return "ltv_only";
        case SchemeId::IdealClock: return "ideal_clock";
        case SchemeId::StateCond: return "state_cond";
        case SchemeId::StateCondTripartite: return "state_cond_tripartite";
        case SchemeId::JumpCondPrelim: return "jump_cond_prelim";
        case SchemeId::JumpCondBipartite: return "jump_cond_bipartite";
        case SchemeId::WaveTriJump: return "wave_tri_jump";
        case SchemeId::WaveTriQubitAncilla: return "wave_tri_qubit_ancilla";
        case SchemeId::WaveBipartite: return "wave_bipartite";
        case SchemeId::QutritWave: return "qutrit_wave";
    }
    return "?";
}

struct ReservoirSpec {
    SubsystemLayout layout;
    std::vector<LabeledCollapseOp> collapse_ops;
    SchemeId scheme;
    RateSet rates;
    bool analysis_companions = false;
    bool nonlocal = false; // ideal clock only
    std::vector<std::string> warnings;
};

enum class ErrorModel { QubitFlips, QutritDepolarizing };

namespace detail {

inline std::string bond_label(int k, const char* kind) { return std::to_string(k + 1) + kind; }

// |11><10| + |00><01| on the {0,1} sub-levels of two Q-dim sites.
inline DenseMatrix ltv_matrix(int Q) {
    DenseMatrix m = DenseMatrix::Zero(Q * Q, Q * Q);
    m(1 * Q + 1, 1 * Q + 0) = 1.0;
    m(0 * Q + 0, 0 * Q + 1) = 1.0;
    return m;
}

// |11><11| + |00><00| (the no-jump companion of the above).
inline DenseMatrix ltv_idle_matrix(int Q) {
    DenseMatrix m = DenseMatrix::Zero(Q * Q, Q * Q);
    m(1 * Q + 1, 1 * Q + 1) = 1.0;
    m(0 * Q + 0, 0 * Q + 0) = 1.0;
    return m;
}

inline void append_ltv(std::vector<LabeledCollapseOp>& out, int n, double kappa_c,
                       bool companions, int Q = 2) {
    const double a = std::sqrt(kappa_c);
    for (int k = 0; k + 1 < n; ++k) {
        out.push_back({LocalOperator{{k, k + 1}, ltv_matrix(Q), a}, bond_label(k, "L"), "r"});
        if (companions)
            out.push_back({LocalOperator{{k, k + 1}, ltv_idle_matrix(Q), a}, bond_label(k, "L"), "i"});
    }
}

inline void append_qubit_errors(std::vector<LabeledCollapseOp>& out, const SubsystemLayout& layout,
                                double kappa_x, double kappa_z) {
    DenseMatrix sx(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sz << 1, 0, 0, -1;
    for (int k : layout.data_sites()) {
        if (kappa_x > 0)
            out.push_back({LocalOperator{{k}, sx, std::sqrt(kappa_x)}, bond_label(k, "E"), "x"});
        if (kappa_z > 0)
            out.push_back({LocalOperator{{k}, sz, std::sqrt(kappa_z)}, bond_label(k, "E"), "z"});
    }
}

} // namespace detail

/// Eq.-style subspace stabilizers alone: n-1 operators, labels {kL}.
inline ReservoirSpec build_ltv(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_ltv: n >= 2 required");
    rates.validate();
    detail::require_positive(rates.kappa_c, "kappa_c");
    ReservoirSpec spec{SubsystemLayout::qubits(n), {}, SchemeId::LtvOnly, rates, companions};
    detail::append_ltv(spec.collapse_ops, n, rates.kappa_c, companions);
    return spec;
}

/// Validation baseline with a collective two-level clock register driving all
/// resets at once. Deliberately nonlocal.
inline ReservoirSpec build_ideal_clock(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_ideal_clock: n >= 2 required");
    rates.validate();
    detail::require_positive(rates.kappa_c, "kappa_c");
    detail::require_positive(rates.kappa_d, "kappa_d");
    detail::require_positive(rates.kappa_r, "kappa_r");

    SubsystemLayout layout = SubsystemLayout::double_chain(n, 1, {"g", "e"});
    ReservoirSpec spec{layout, {}, SchemeId::IdealClock, rates, companions};
    spec.nonlocal = true;
    if (rates.kappa_u == 0.0)
        spec.warnings.push_back("kappa_u = 0: clock never fires, generator kernel is degenerate");

    const int reg = n; // the clock register site
    DenseMatrix up = ketbra(basis_ket(2, 1), basis_ket(2, 0));
    DenseMatrix down = ketbra(basis_ket(2, 0), basis_ket(2, 1));
    spec.collapse_ops.push_back({LocalOperator{{reg}, up, std::sqrt(rates.kappa_u)}, "clock", "up"});
    spec.collapse_ops.push_back({LocalOperator{{reg}, down, std::sqrt(rates.kappa_d)}, "clock", "down"});

    DenseMatrix pe = ketbra(basis_ket(2, 1), basis_ket(2, 1));
    const double ar = std::sqrt(rates.kappa_r);
    for (int k = 0; k < n; ++k) {
        DenseMatrix reset = Eigen::kroneckerProduct(pe, ketbra(plus_ket(2), minus_ket(2))).eval();
        spec.collapse_ops.push_back({LocalOperator{{reg, k}, reset, ar}, detail::bond_label(k, "+"), "r"});
        if (companions) {
            DenseMatrix idle = Eigen::kroneckerProduct(pe, ketbra(plus_ket(2), plus_ket(2))).eval();
            spec.collapse_ops.push_back({LocalOperator{{reg, k}, idle, ar}, detail::bond_label(k, "+"), "i"});
        }
    }
    detail::append_ltv(spec.collapse_ops, n, rates.kappa_c, companions);
    return spec;
}

/// Correlated-ancilla clock with state-conditioned resets: n data qubits plus
/// n ancilla qutrits cycling g -> e -> m -> g.
inline ReservoirSpec build_state_conditioning(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_state_conditioning: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_d, "kappa_d"},
                         {rates.kappa_t, "kappa_t"}, {rates.kappa_st, "kappa_st"},
                         {rates.kappa_r, "kappa_r"}, {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);

    SubsystemLayout layout = SubsystemLayout::double_chain(n, n, {"g", "e", "m"});
    ReservoirSpec spec{layout, {}, SchemeId::StateCond, rates, companions};
    auto A = [n](int k) { return n + k; };

    auto q3 = [](int i) { return basis_ket(3, i); };
    const int g = 0, e = 1, m = 2;

    // spontaneous cycle, one full-rank coherent sum per ancilla
    DenseMatrix sp = std::sqrt(rates.kappa_u) * ketbra(q3(e), q3(g)) +
                     std::sqrt(rates.kappa_d) * ketbra(q3(m), q3(e)) +
                     std::sqrt(rates.kappa_t) * ketbra(q3(g), q3(m));
    for (int k = 0; k < n; ++k)
        spec.collapse_ops.push_back({LocalOperator{{A(k)}, sp, 1.0}, "clock", "sp"});

    // neighbor-stimulated jumps
    DenseMatrix stp = DenseMatrix::Zero(9, 9), stm = DenseMatrix::Zero(9, 9);
    auto pair_term = [&](DenseMatrix& M, int r1, int r2, int c1, int c2) {
        M += Eigen::kroneckerProduct(ketbra(q3(r1), q3(c1)), ketbra(q3(r2), q3(c2))).eval();
    };
    pair_term(stp, e, e, g, e);
    pair_term(stp, m, m, e, m);
    pair_term(stp, g, g, m, g);
    pair_term(stm, e, e, e, g);
    pair_term(stm, m, m, m, e);
    pair_term(stm, g, g, g, m);
    const double ast = std::sqrt(rates.kappa_st);
    for (int k = 0; k + 1 < n; ++k)
        spec.collapse_ops.push_back({LocalOperator{{A(k), A(k + 1)}, stp, ast}, "clock", "st+"});
    for (int k = 1; k < n; ++k)
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, stm, ast}, "clock", "st-"});

    // state-conditioned resets |e,+><e,-| on (ancilla k, data k)
    DenseMatrix pe = ketbra(q3(e), q3(e));
    const double ar = std::sqrt(rates.kappa_r);
    for (int k = 0; k < n; ++k) {
        DenseMatrix reset = Eigen::kroneckerProduct(pe, ketbra(plus_ket(2), minus_ket(2))).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k}, reset, ar}, detail::bond_label(k, "+"), "r"});
        if (companions) {
            DenseMatrix idle = Eigen::kroneckerProduct(pe, ketbra(plus_ket(2), plus_ket(2))).eval();
            spec.collapse_ops.push_back({LocalOperator{{A(k), k}, idle, ar}, detail::bond_label(k, "+"), "i"});
        }
    }
    detail::append_ltv(spec.collapse_ops, n, rates.kappa_c, companions);
    return spec;
}

/// Tripartite switching variant: per-pair ancillas (m = n-1) gate the L_k off
/// while resets are running.
inline ReservoirSpec build_state_cond_tripartite(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_state_cond_tripartite: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_d, "kappa_d"},
                         {rates.kappa_t, "kappa_t"}, {rates.kappa_r, "kappa_r"},
                         {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);
    const int m = n - 1;
    if (m >= 2) detail::require_positive(rates.kappa_st, "kappa_st");

    SubsystemLayout layout = SubsystemLayout::double_chain(n, m, {"g", "e", "m"});
    ReservoirSpec spec{layout, {}, SchemeId::StateCondTripartite, rates, companions};
    auto A = [n](int k) { return n + k; };
    auto q3 = [](int i) { return basis_ket(3, i); };
    const int g = 0, e = 1, mm = 2;

    // clock as in the state-conditioning scheme, on the m = n-1 ancillas
    DenseMatrix sp = std::sqrt(rates.kappa_u) * ketbra(q3(e), q3(g)) +
                     std::sqrt(rates.kappa_d) * ketbra(q3(mm), q3(e)) +
                     std::sqrt(rates.kappa_t) * ketbra(q3(g), q3(mm));
    for (int k = 0; k < m; ++k)
        spec.collapse_ops.push_back({LocalOperator{{A(k)}, sp, 1.0}, "clock", "sp"});
    if (m >= 2) {
        DenseMatrix stp = DenseMatrix::Zero(9, 9), stm_ = DenseMatrix::Zero(9, 9);
        auto pair_term = [&](DenseMatrix& M, int r1, int r2, int c1, int c2) {
            M += Eigen::kroneckerProduct(ketbra(q3(r1), q3(c1)), ketbra(q3(r2), q3(c2))).eval();
        };
        pair_term(stp, e, e, g, e);
        pair_term(stp, mm, mm, e, mm);
        pair_term(stp, g, g, mm, g);
        pair_term(stm_, e, e, e, g);
        pair_term(stm_, mm, mm, mm, e);
        pair_term(stm_, g, g, g, mm);
        const double ast = std::sqrt(rates.kappa_st);
        for (int k = 0; k + 1 < m; ++k)
            spec.collapse_ops.push_back({LocalOperator{{A(k), A(k + 1)}, stp, ast}, "clock", "st+"});
        for (int k = 1; k < m; ++k)
            spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, stm_, ast}, "clock", "st-"});
    }

    // gated stabilizers: (|g><g| + |m><m|)_anc k (x) L_k
    DenseMatrix gate = ketbra(q3(g), q3(g)) + ketbra(q3(mm), q3(mm));
    const double ac = std::sqrt(rates.kappa_c);
    for (int k = 0; k + 1 < n; ++k) {
        DenseMatrix gl = Eigen::kroneckerProduct(gate, detail::ltv_matrix(2)).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k, k + 1}, gl, ac}, detail::bond_label(k, "L"), "r"});
        if (companions) {
            DenseMatrix gi = Eigen::kroneckerProduct(gate, detail::ltv_idle_matrix(2)).eval();
            spec.collapse_ops.push_back({LocalOperator{{A(k), k, k + 1}, gi, ac}, detail::bond_label(k, "L"), "i"});
        }
    }

    // resets conditioned on the neighboring ancilla pair being in |ee>
    const double ar = std::sqrt(rates.kappa_r);
    DenseMatrix pe = ketbra(q3(e), q3(e));
    auto push_reset = [&](std::vector<int> sites, const DenseMatrix& cond, int data_site) {
        DenseMatrix r = Eigen::kroneckerProduct(cond, ketbra(plus_ket(2), minus_ket(2))).eval();
        sites.push_back(data_site);
        spec.collapse_ops.push_back({LocalOperator{sites, r, ar}, detail::bond_label(data_site, "+"), "r"});
        if (companions) {
            DenseMatrix i = Eigen::kroneckerProduct(cond, ketbra(plus_ket(2), plus_ket(2))).eval();
            spec.collapse_ops.push_back({LocalOperator{sites, i, ar}, detail::bond_label(data_site, "+"), "i"});
        }
    };
    push_reset({A(0)}, pe, 0);
    DenseMatrix pee = Eigen::kroneckerProduct(pe, pe).eval();
    for (int k = 1; k + 1 < n; ++k) push_reset({A(k - 1), A(k)}, pee, k);
    push_reset({A(m - 1)}, pe, n - 1);
    return spec;
}

/// Jump-conditioning baseline: two-level ancillas, each data qubit resets when
/// its own ancilla jumps up. Documented as non-stabilizing for n > 1 since the
/// per-site resets are not synchronized.
inline ReservoirSpec build_jump_cond_prelim(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_jump_cond_prelim: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_d, "kappa_d"},
                         {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);

    SubsystemLayout layout = SubsystemLayout::double_chain(n, n, {"g", "e"});
    ReservoirSpec spec{layout, {}, SchemeId::JumpCondPrelim, rates, companions};
    spec.warnings.push_back("per-site resets are unsynchronized; not a stabilizing scheme for n > 1");
    auto A = [n](int k) { return n + k; };
    auto q2 = [](int i) { return basis_ket(2, i); };

    const double au = std::sqrt(rates.kappa_u), ad = std::sqrt(rates.kappa_d);
    for (int k = 0; k < n; ++k) {
        spec.collapse_ops.push_back(
            {LocalOperator{{A(k)}, ketbra(q2(0), q2(1)), ad}, "clock", "down"});
        DenseMatrix up = ketbra(q2(1), q2(0));
        DenseMatrix n1 = Eigen::kroneckerProduct(up, ketbra(plus_ket(2), plus_ket(2))).eval();
        DenseMatrix n2 = Eigen::kroneckerProduct(up, ketbra(plus_ket(2), minus_ket(2))).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k}, n1, au}, detail::bond_label(k, "+"), "i"});
        spec.collapse_ops.push_back({LocalOperator{{A(k), k}, n2, au}, detail::bond_label(k, "+"), "r"});
    }
    detail::append_ltv(spec.collapse_ops, n, rates.kappa_c, companions);
    return spec;
}

/// Bipartite jump-conditioning clock with four-level ancillas (g,f,e,m): data
/// resets ride on the fast spontaneous f -> e ancilla jump.
inline ReservoirSpec build_jump_cond_bipartite(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_jump_cond_bipartite: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_d, "kappa_d"},
                         {rates.kappa_t, "kappa_t"}, {rates.kappa_st, "kappa_st"},
                         {rates.kappa_f, "kappa_f"}, {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);

    SubsystemLayout layout = SubsystemLayout::double_chain(n, n, {"g", "f", "e", "m"});
    ReservoirSpec spec{layout, {}, SchemeId::JumpCondBipartite, rates, companions};
    auto A = [n](int k) { return n + k; };
    auto q4 = [](int i) { return basis_ket(4, i); };
    const int g = 0, f = 1, e = 2, m = 3;

    DenseMatrix sp = std::sqrt(rates.kappa_u) * ketbra(q4(f), q4(g)) +
                     std::sqrt(rates.kappa_d) * ketbra(q4(m), q4(e)) +
                     std::sqrt(rates.kappa_t) * ketbra(q4(g), q4(m));
    for (int k = 0; k < n; ++k)
        spec.collapse_ops.push_back({LocalOperator{{A(k)}, sp, 1.0}, "clock", "sp"});

    const double af = std::sqrt(rates.kappa_f);
    for (int k = 0; k < n; ++k) {
        DenseMatrix fe = ketbra(q4(e), q4(f));
        DenseMatrix nr = Eigen::kroneckerProduct(fe, ketbra(plus_ket(2), minus_ket(2))).eval();
        DenseMatrix ni = Eigen::kroneckerProduct(fe, ketbra(plus_ket(2), plus_ket(2))).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k}, nr, af}, detail::bond_label(k, "+"), "r"});
        spec.collapse_ops.push_back({LocalOperator{{A(k), k}, ni, af}, detail::bond_label(k, "+"), "i"});
    }

    DenseMatrix st1p = DenseMatrix::Zero(16, 16), st2p = DenseMatrix::Zero(16, 16);
    DenseMatrix st1m = DenseMatrix::Zero(16, 16), st2m = DenseMatrix::Zero(16, 16);
    auto pair_term = [&](DenseMatrix& M, int r1, int r2, int c1, int c2) {
        M += Eigen::kroneckerProduct(ketbra(q4(r1), q4(c1)), ketbra(q4(r2), q4(c2))).eval();
    };
    pair_term(st1p, f, f, g, f);
    pair_term(st1p, m, m, e, m);
    pair_term(st1p, g, g, m, g);
    pair_term(st2p, f, e, g, e);
    pair_term(st1m, f, f, f, g);
    pair_term(st1m, m, m, m, e);
    pair_term(st1m, g, g, g, m);
    pair_term(st2m, e, f, e, g);
    const double ast = std::sqrt(rates.kappa_st);
    for (int k = 0; k + 1 < n; ++k) {
        spec.collapse_ops.push_back({LocalOperator{{A(k), A(k + 1)}, st1p, ast}, "clock", "st1+"});
        spec.collapse_ops.push_back({LocalOperator{{A(k), A(k + 1)}, st2p, ast}, "clock", "st2+"});
    }
    for (int k = 1; k < n; ++k) {
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, st1m, ast}, "clock", "st1-"});
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, st2m, ast}, "clock", "st2-"});
    }
    detail::append_ltv(spec.collapse_ops, n, rates.kappa_c, companions);
    return spec;
}

/// Tripartite jump-conditioning wave ("ancilla automaton"): per-pair four-level
/// ancillas walk a strictly sequential reset-then-L_k program.
inline ReservoirSpec build_wave_tri_jump(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_wave_tri_jump: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);
    const int m = n - 1;
    if (n > 2) detail::require_positive(rates.kappa_st, "kappa_st");

    SubsystemLayout layout = SubsystemLayout::double_chain(n, m, {"g", "f", "e", "m"});
    ReservoirSpec spec{layout, {}, SchemeId::WaveTriJump, rates, companions};
    auto A = [n](int k) { return n + k; };
    auto q4 = [](int i) { return basis_ket(4, i); };
    const int g = 0, f = 1, e = 2, mm = 3;

    // launch: ancilla 0 jumps g -> e while resetting data qubits 0 and 1
    {
        const double au = std::sqrt(rates.kappa_u);
        DenseMatrix up = ketbra(q4(e), q4(g));
        const DenseVector pl = plus_ket(2), mi = minus_ket(2);
        const std::pair<const DenseVector*, const char*> srcs[2] = {{&mi, "r"}, {&pl, "i"}};
        for (auto [s1, t1] : srcs)
            for (auto [s2, t2] : srcs) {
                DenseMatrix loc =
                    Eigen::kroneckerProduct(up, Eigen::kroneckerProduct(ketbra(pl, *s1), ketbra(pl, *s2)).eval())
                        .eval();
                spec.collapse_ops.push_back({LocalOperator{{A(0), 0, 1}, loc, au}, "1+",
                                             std::string(t1) + t2});
            }
    }
    // propagation: ancilla k jumps f -> e while resetting data qubit k+1
    const double ast = std::sqrt(rates.kappa_st);
    for (int k = 1; k < m; ++k) {
        DenseMatrix fe = ketbra(q4(e), q4(f));
        DenseMatrix nr = Eigen::kroneckerProduct(fe, ketbra(plus_ket(2), minus_ket(2))).eval();
        DenseMatrix ni = Eigen::kroneckerProduct(fe, ketbra(plus_ket(2), plus_ket(2))).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k + 1}, nr, ast}, detail::bond_label(k + 1, "+"), "r"});
        spec.collapse_ops.push_back({LocalOperator{{A(k), k + 1}, ni, ast}, detail::bond_label(k + 1, "+"), "i"});
    }
    // hand-over: ancilla k returns m -> g and kicks ancilla k+1 to f
    for (int k = 0; k + 1 < m; ++k) {
        DenseMatrix ho =
            Eigen::kroneckerProduct(ketbra(q4(g), q4(mm)), ketbra(q4(f), q4(g))).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), A(k + 1)}, ho, ast}, "clock", "hand"});
    }
    // gated stabilizers riding the ancilla jump e -> m (last ancilla: e -> g)
    const double ac = std::sqrt(rates.kappa_c);
    for (int k = 0; k < m; ++k) {
        DenseMatrix anc = (k + 1 < m) ? ketbra(q4(mm), q4(e)) : ketbra(q4(g), q4(e));
        DenseMatrix lr = Eigen::kroneckerProduct(anc, detail::ltv_matrix(2)).eval();
        DenseMatrix li = Eigen::kroneckerProduct(anc, detail::ltv_idle_matrix(2)).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k, k + 1}, lr, ac}, detail::bond_label(k, "L"), "r"});
        spec.collapse_ops.push_back({LocalOperator{{A(k), k, k + 1}, li, ac}, detail::bond_label(k, "L"), "i"});
    }
    return spec;
}

/// Tripartite wave with qubit ancillas, one per bond: ancilla k in |e| means
/// "qubit k reset done, qubit k+1 pending" and gates L_k off; the L_k stay on
/// everywhere else.
inline ReservoirSpec build_wave_tri_qubit_ancilla(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_wave_tri_qubit_ancilla: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_st, "kappa_st"},
                         {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);
    const int m = n - 1;

    SubsystemLayout layout = SubsystemLayout::double_chain(n, m, {"g", "e"});
    ReservoirSpec spec{layout, {}, SchemeId::WaveTriQubitAncilla, rates, companions};
    auto A = [n](int k) { return n + k; };
    auto q2 = [](int i) { return basis_ket(2, i); };

    const DenseVector pl = plus_ket(2), mi = minus_ket(2);
    const double au = std::sqrt(rates.kappa_u), ast = std::sqrt(rates.kappa_st);

    DenseMatrix up = ketbra(q2(1), q2(0)), down = ketbra(q2(0), q2(1));
    // launch on (ancilla 0, data 0)
    spec.collapse_ops.push_back(
        {LocalOperator{{A(0), 0}, Eigen::kroneckerProduct(up, ketbra(pl, mi)).eval(), au}, "1+", "r"});
    spec.collapse_ops.push_back(
        {LocalOperator{{A(0), 0}, Eigen::kroneckerProduct(up, ketbra(pl, pl)).eval(), au}, "1+", "i"});
    // token exchange (ancilla k-1, ancilla k) with reset of data qubit k
    DenseMatrix ex = Eigen::kroneckerProduct(down, up).eval();
    for (int k = 1; k < m; ++k) {
        DenseMatrix nr = Eigen::kroneckerProduct(ex, ketbra(pl, mi)).eval();
        DenseMatrix ni = Eigen::kroneckerProduct(ex, ketbra(pl, pl)).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k), k}, nr, ast}, detail::bond_label(k, "+"), "r"});
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k), k}, ni, ast}, detail::bond_label(k, "+"), "i"});
        DenseMatrix nv =
            Eigen::kroneckerProduct(down, ketbra(q2(1), q2(1))).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, nv, ast}, "clock", "v"});
    }
    // terminal reset of data qubit n-1: the token leaves the chain
    spec.collapse_ops.push_back(
        {LocalOperator{{A(m - 1), n - 1}, Eigen::kroneckerProduct(down, ketbra(pl, mi)).eval(), ast},
         detail::bond_label(n - 1, "+"), "r"});
    spec.collapse_ops.push_back(
        {LocalOperator{{A(m - 1), n - 1}, Eigen::kroneckerProduct(down, ketbra(pl, pl)).eval(), ast},
         detail::bond_label(n - 1, "+"), "i"});

    // gated stabilizers sqrt(kc) |g><g|_anc k (x) L_k
    const double ac = std::sqrt(rates.kappa_c);
    DenseMatrix pg = ketbra(q2(0), q2(0));
    for (int k = 0; k + 1 < n; ++k) {
        DenseMatrix lr = Eigen::kroneckerProduct(pg, detail::ltv_matrix(2)).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k, k + 1}, lr, ac}, detail::bond_label(k, "L"), "r"});
        if (companions) {
            DenseMatrix li = Eigen::kroneckerProduct(pg, detail::ltv_idle_matrix(2)).eval();
            spec.collapse_ops.push_back({LocalOperator{{A(k), k, k + 1}, li, ac}, detail::bond_label(k, "L"), "i"});
        }
    }
    return spec;
}

/// Bipartite reset wave: per-site qutrit ancillas, L_k always on.
inline ReservoirSpec build_wave_bipartite(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_wave_bipartite: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_st, "kappa_st"},
                         {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);

    SubsystemLayout layout = SubsystemLayout::double_chain(n, n, {"g", "e", "m"});
    ReservoirSpec spec{layout, {}, SchemeId::WaveBipartite, rates, companions};
    if (!(rates.kappa_st > rates.kappa_c && rates.kappa_c > rates.kappa_u))
        spec.warnings.push_back("rate ordering kappa_st >> kappa_c >> kappa_u violated");
    auto A = [n](int k) { return n + k; };
    auto q3 = [](int i) { return basis_ket(3, i); };
    const int g = 0, e = 1, m = 2;
    const double au = std::sqrt(rates.kappa_u), ast = std::sqrt(rates.kappa_st);

    spec.collapse_ops.push_back({LocalOperator{{A(0)}, ketbra(q3(e), q3(g)), au}, "clock", "launch"});
    for (int k = 1; k < n; ++k) {
        auto term = [&](int src) {
            return Eigen::kroneckerProduct(ketbra(q3(g), q3(m)), ketbra(q3(e), q3(src))).eval();
        };
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, term(g), ast}, "clock", "r"});
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, term(m), ast}, "clock", "i"});
        spec.collapse_ops.push_back({LocalOperator{{A(k - 1), A(k)}, term(e), ast}, "clock", "v"});
    }
    for (int k = 0; k < n; ++k) {
        DenseMatrix em = ketbra(q3(m), q3(e));
        DenseMatrix nr = Eigen::kroneckerProduct(em, ketbra(plus_ket(2), minus_ket(2))).eval();
        DenseMatrix ni = Eigen::kroneckerProduct(em, ketbra(plus_ket(2), plus_ket(2))).eval();
        spec.collapse_ops.push_back({LocalOperator{{A(k), k}, nr, ast}, detail::bond_label(k, "+"), "r"});
        spec.collapse_ops.push_back({LocalOperator{{A(k), k}, ni, ast}, detail::bond_label(k, "+"), "i"});
    }
    detail::append_ltv(spec.collapse_ops, n, rates.kappa_c, companions);
    return spec;
}

/// The ancilla-free scheme: data qutrits, reset wave propagated through the
/// auxiliary level |2>.
inline ReservoirSpec build_qutrit_wave(int n, const RateSet& rates, bool companions = false) {
    if (n < 2) throw std::invalid_argument("build_qutrit_wave: n >= 2 required");
    rates.validate();
    const std::pair<double, const char*> req[] = {{rates.kappa_u, "kappa_u"}, {rates.kappa_st, "kappa_st"},
                         {rates.kappa_c, "kappa_c"}};
    for (auto [v, nm] : req) detail::require_positive(v, nm);

    SubsystemLayout layout = SubsystemLayout::qutrits(n);
    ReservoirSpec spec{layout, {}, SchemeId::QutritWave, rates, companions};
    auto q3 = [](int i) { return basis_ket(3, i); };
    const DenseVector pl = plus_ket(3), mi = minus_ket(3), two = q3(2);
    const double au = std::sqrt(rates.kappa_u), ast = std::sqrt(rates.kappa_st);

    spec.collapse_ops.push_back({LocalOperator{{0}, ketbra(two, mi), au}, "U", "r"});
    spec.collapse_ops.push_back({LocalOperator{{0}, ketbra(two, pl), au}, "U", "i"});
    for (int k = 0; k + 1 < n; ++k) {
        DenseVector dst = Eigen::kroneckerProduct(pl, two).eval();
        auto push = [&](const DenseVector& s2, const char* tag) {
            DenseVector src = Eigen::kroneckerProduct(two, s2).eval();
            spec.collapse_ops.push_back(
                {LocalOperator{{k, k + 1}, ketbra(dst, src), ast}, detail::bond_label(k, "+"), tag});
        };
        push(mi, "r");
        push(pl, "i");
        push(two, "v");
    }
    spec.collapse_ops.push_back({LocalOperator{{n - 1}, ketbra(pl, two), ast},
                                 detail::bond_label(n - 1, "+"), "r"});
    detail::append_ltv(spec.collapse_ops, n, rates.kappa_c, companions, /*Q=*/3);
    return spec;
}

inline ReservoirSpec build_scheme(SchemeId id, int n, const RateSet& rates, bool companions = false) {
    switch (id) {
        case SchemeId::LtvOnly: return build_ltv(n, rates, companions);
        case SchemeId::IdealClock: return build_ideal_clock(n, rates, companions);
        case SchemeId::StateCond: return build_state_conditioning(n, rates, companions);
        case SchemeId::StateCondTripartite: return build_state_cond_tripartite(n, rates, companions);
        case SchemeId::JumpCondPrelim: return build_jump_cond_prelim(n, rates, companions);
        case SchemeId::JumpCondBipartite: return build_jump_cond_bipartite(n, rates, companions);
        case SchemeId::WaveTriJump: return build_wave_tri_jump(n, rates, companions);
        case SchemeId::WaveTriQubitAncilla: return build_wave_tri_qubit_ancilla(n, rates, companions);
        case SchemeId::WaveBipartite: return build_wave_bipartite(n, rates, companions);
        case SchemeId::QutritWave: return build_qutrit_wave(n, rates, companions);
    }
    throw std::invalid_argument("unknown scheme");
}

/// Perturbation channels on the data sites.
inline std::vector<LabeledCollapseOp> build_error_channels(const SubsystemLayout& layout,
                                                           const RateSet& rates, ErrorModel model) {
    std::vector<LabeledCollapseOp> out;
    if (model == ErrorModel::QubitFlips) {
        double kx = rates.kappa_x, kz = rates.kappa_z;
        if (kx == 0.0 && kz == 0.0 && rates.kappa_p > 0.0) kx = kz = rates.kappa_p / 2.0;
        for (int k : layout.data_sites())
            if (layout.dim(k) != 2) throw std::invalid_argument("QubitFlips needs qubit data sites");
        detail::append_qubit_errors(out, layout, kx, kz);
    } else {
        if (rates.kappa_p <= 0.0) return out;
        const double a = std::sqrt(rates.kappa_p);
        for (int k : layout.data_sites()) {
            if (layout.dim(k) != 3) throw std::invalid_argument("QutritDepolarizing needs qutrit data sites");
            int sub = 1;
            for (auto [r, c] : {std::pair{0, 1}, {0, 2}, {1, 2}, {1, 0}, {2, 0}, {2, 1}}) {
                out.push_back({LocalOperator{{k}, ketbra(basis_ket(3, r), basis_ket(3, c)), a},
                               detail::bond_label(k, "E"), std::to_string(sub++)});
            }
        }
    }
    return out;
}

// --- structural audits ----------------------------------------------------

/// Neighborhood relation of the double chain: data-data and ancilla-ancilla
/// chain links, plus data k adjacent to ancilla k (per-site schemes) and to
/// ancilla k-1 (per-pair schemes).
inline bool sites_quasi_local(const ReservoirSpec& spec, const std::vector<int>& sites) {
    if (sites.size() > 3) return false;
    if (sites.size() <= 1) return true;
    const auto& layout = spec.layout;
    const int n = layout.num_data();
    auto kind = [&](int s) { return layout.site(s).role; };
    auto adjacent = [&](int a, int b) {
        if (a == b) return false;
        const bool da = kind(a) == SiteRole::Data, db = kind(b) == SiteRole::Data;
        const int ia = da ? a : a - n, ib = db ? b : b - n;
        if (da == db) return std::abs(ia - ib) == 1;
        const int d = da ? ia : ib, anc = da ? ib : ia;
        return anc == d || anc == d - 1;
    };
    // connected neighbor set
    for (size_t i = 0; i < sites.size(); ++i) {
        bool linked = sites.size() == 1;
        for (size_t j = 0; j < sites.size(); ++j)
            if (i != j && adjacent(sites[i], sites[j])) linked = true;
        if (!linked) return false;
    }
    return true;
}

struct AuditResult {
    bool passed = true;
    std::vector<std::string> failures;
};

inline AuditResult quasi_locality_audit(const ReservoirSpec& spec) {
    AuditResult res;
    if (spec.nonlocal) {
        res.passed = false;
        res.failures.push_back("scheme flagged nonlocal by construction");
        return res;
    }
    for (const auto& c : spec.collapse_ops)
        if (!sites_quasi_local(spec, c.op.sites)) {
            res.passed = false;
            res.failures.push_back("operator " + c.label + ":" + c.sub + " is not quasi-local");
        }
    return res;
}

/// Checks that every operator's ancilla factor is a partial injection between
/// canonical basis states, so ancilla-diagonal densities stay diagonal.
inline AuditResult ancilla_classical_audit(const ReservoirSpec& spec) {
    AuditResult res;
    const auto& layout = spec.layout;
    for (const auto& c : spec.collapse_ops) {
        std::vector<int> anc_pos, dat_pos;
        for (size_t i = 0; i < c.op.sites.size(); ++i) {
            if (layout.site(c.op.sites[i]).role == SiteRole::Ancilla) anc_pos.push_back(static_cast<int>(i));
            else dat_pos.push_back(static_cast<int>(i));
        }
        if (anc_pos.empty()) continue;
        std::vector<int> ldims(c.op.sites.size());
        for (size_t i = 0; i < c.op.sites.size(); ++i) ldims[i] = layout.dim(c.op.sites[i]);
        long adim = 1, ddim = 1;
        for (int i : anc_pos) adim *= ldims[i];
        for (int i : dat_pos) ddim *= ldims[i];
        auto split = [&](long idx) {
            std::vector<int> dig(ldims.size());
            for (int i = static_cast<int>(ldims.size()) - 1; i >= 0; --i) {
                dig[i] = static_cast<int>(idx % ldims[i]);
                idx /= ldims[i];
            }
            long a = 0, d = 0;
            for (int i : anc_pos) a = a * ldims[i] + dig[i];
            for (int i : dat_pos) d = d * ldims[i] + dig[i];
            return std::pair<long, long>(a, d);
        };
        // nonzero ancilla blocks must not share a row or a column
        std::set<long> rows, cols;
        std::set<std::pair<long, long>> blocks;
        const long L = c.op.matrix.rows();
        for (long r = 0; r < L; ++r)
            for (long cc = 0; cc < L; ++cc) {
                if (c.op.matrix(r, cc) == cplx(0.0, 0.0)) continue;
                blocks.insert({split(r).first, split(cc).first});
            }
        bool ok = true;
        for (const auto& [ar, ac] : blocks) {
            if (rows.count(ar) || cols.count(ac)) ok = false;
            rows.insert(ar);
            cols.insert(ac);
        }
        if (!ok) {
            res.passed = false;
            res.failures.push_back("operator " + c.label + ":" + c.sub + " creates ancilla coherence");
        }
    }
    return res;
}

} // namespace ghzres
