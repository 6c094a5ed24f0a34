// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <vector>

#include "ghzres/experiment.hpp"

using namespace ghzres;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    if (!ok) ++g_failures;
}

bool within_factor(double value, double target, double factor) {
    return value <= target * factor && value >= target / factor;
}

// --- 1. kappa_Rmu exactness -------------------------------------------------
void criterion1() {
    const double expect[] = {3.0, 4.5, 5.0 + 7.0 / 8.0, 6.0 + 19.0 / 16.0};
    bool ok = true;
    std::string detail;
    for (int n = 2; n <= 5; ++n) {
        const double kst = 2.75;
        const auto lat = lattice_crossing_rate(n, kst);
        const double target = kst / expect[n - 2];
        ok &= std::abs(lat.kappa_rmu - target) <= 1e-12 * target;
        ok &= lat.consistency_ok;
        detail += "n=" + std::to_string(n) + ":" + exp_detail::fmt17(lat.denominator) + " ";
    }
    report(1, "lattice crossing rate closed-form table", ok, detail);
}

// --- 2. clock formula vs exact CTMC ----------------------------------------
void criterion2() {
    RateSet r;
    r.kappa_st = 1.0;
    r.kappa_d = 1e-3;         // eps2 = 1e-3
    r.kappa_u = r.kappa_t = 1e-6; // eps1 = 1e-3
    const auto formula = principal_populations_formula(r);
    bool ok = true;
    std::string detail;
    for (int n : {3, 4}) {
        auto model = build_ancilla_clock_ctmc(n, r);
        auto rep = ctmc_stationary(model);
        const double pg = rep.distribution(model.index_of(std::string(n, 'g')));
        const double pe = rep.distribution(model.index_of(std::string(n, 'e')));
        const double pm = rep.distribution(model.index_of(std::string(n, 'm')));
        const double tol = 10.0 * (1e-3 + n * 1e-3);
        ok &= std::abs(pg - formula[0]) <= tol * formula[0];
        ok &= std::abs(pe - formula[1]) <= tol * formula[1];
        ok &= std::abs(pm - formula[2]) <= tol * formula[2];
        const double off = 1.0 - pg - pe - pm;
        const double bound = off_principal_bound(n, 1e-3, 1e-3);
        ok &= off <= 3.0 * bound && off >= 0.2 * bound;
        detail += "n=" + std::to_string(n) + " off/bound=" + exp_detail::fmt17(off / bound) + " ";
    }
    report(2, "clock stationary state vs principal-population formula", ok, detail);
}

// --- 3. llp recursions vs chain linear solve --------------------------------
void criterion3() {
    std::mt19937_64 rng(314159);
    std::uniform_real_distribution<double> j(-0.3, 0.3);
    bool ok = true;
    double worst = 0.0, worst_lead = 0.0;
    for (int n : {3, 4, 5}) {
        for (int trial = 0; trial < 5; ++trial) {
            RateSet r;
            r.kappa_r = r.kappa_st = 1.0;
            r.kappa_d = 1e-3 * std::pow(10.0, j(rng));
            r.kappa_c = 1e-3 * std::pow(10.0, j(rng));
            r.kappa_u = r.kappa_d * 1e-3 * std::pow(10.0, j(rng));
            r.kappa_t = r.kappa_d * 1e-3 * std::pow(10.0, j(rng));
            r.kappa_p = r.kappa_u * 1e-3 * std::pow(10.0, j(rng));
            auto model = build_reduced_state_cond_chain(n, r);
            auto lin = ctmc_stationary(model);
            auto rec = llp_exact(n, r);
            for (const auto& [label, value] : rec.populations)
                worst = std::max(worst, std::abs(lin.distribution(model.index_of(label)) - value));
            const double ghz = lin.distribution(model.index_of("GHZ^e")) +
                               lin.distribution(model.index_of("GHZ^mg"));
            const double lead = llp_leading_order(n, r);
            worst_lead = std::max(worst_lead, std::abs(lead - ghz) / (1.0 - ghz));
            ok &= std::abs(ghz - rec.p_ghz_total) <= 1e-9;
        }
    }
    ok &= worst <= 1e-9;
    ok &= worst_lead <= 0.10;
    report(3, "llp exact recursions vs linear solve, leading order within 10%", ok,
           "max pop diff=" + exp_detail::fmt17(worst) +
               " max lead rel=" + exp_detail::fmt17(worst_lead));
}

// --- 4. qutrit-wave figure point --------------------------------------------
void criterion4() {
    RateSet r;
    r.kappa_p = 1.0;
    r.kappa_st = r.kappa_c = 1e4;
    r.kappa_u = 100.0; // method-B tuning: sqrt(kp kc)
    auto spec = build_qutrit_wave(3, r);
    auto errs = build_error_channels(spec.layout, r, ErrorModel::QutritDepolarizing);
    auto rep = solve_steady_state(spec, errs);
    const double err = 1.0 - rep.ghz_fidelity;
    const double target = 2.0 * 3 * std::sqrt(r.kappa_p / r.kappa_c); // 0.06
    const bool ok = within_factor(err, target, 2.0);
    report(4, "qutrit wave n=3 error vs method-B estimate", ok,
           "error=" + exp_detail::fmt17(err) + " target=" + exp_detail::fmt17(target));
}

// --- 5. optimal kappa_u independent of n ------------------------------------
void criterion5() {
    RateSet fixed;
    fixed.kappa_p = 1.0;
    fixed.kappa_st = fixed.kappa_c = 1e4;
    GridAxis axis{"kappa_u", 1.0, 3.0, 27}; // 13 points/decade over [10, 1000]
    double argmin[2] = {0, 0};
    int i = 0;
    bool ok = true;
    for (int n : {3, 4}) {
        auto res = grid_search(SchemeId::QutritWave, n, fixed, {axis}, TuneObjective::FullSolve);
        ok &= res.failures == 0;
        argmin[i++] = res.best.kappa_u;
    }
    const double target = std::sqrt(fixed.kappa_p * fixed.kappa_c); // 100 kappa_p
    ok &= within_factor(argmin[0], target, 2.0);
    ok &= within_factor(argmin[1], target, 2.0);
    ok &= within_factor(argmin[0], argmin[1], 2.0);
    report(5, "optimal kappa_u near sqrt(kp kc) and n-independent", ok,
           "argmin(n=3)=" + exp_detail::fmt17(argmin[0]) +
               " argmin(n=4)=" + exp_detail::fmt17(argmin[1]) +
               " target=" + exp_detail::fmt17(target));
}

// --- 6. ancilla-clock cube-root scaling -------------------------------------
void criterion6() {
    const int n = 3;
    double errs[2] = {0, 0};
    int i = 0;
    bool ok = true;
    for (double ratio : {1e4, 1e6}) {
        const double kp = 1.0;
        auto [theory, predicted] = optimal_rates_state_cond(n, ratio * kp, kp);
        (void)predicted;
        // refine around the theory point on the Markov-estimate objective
        RateSet best = theory;
        double best_err = 1.0 - llp_exact(n, theory).p_ghz_total;
        for (double a : {0.5, 1.0, 2.0})
            for (double b : {0.5, 1.0, 2.0})
                for (double c : {0.5, 1.0, 2.0}) {
                    RateSet cand = theory;
                    cand.kappa_u = theory.kappa_u * a;
                    cand.kappa_t = theory.kappa_t * a;
                    cand.kappa_d = theory.kappa_d * b;
                    cand.kappa_c = theory.kappa_c * c;
                    const double e = 1.0 - llp_exact(n, cand).p_ghz_total;
                    if (e < best_err) {
                        best_err = e;
                        best = cand;
                    }
                }
        // full solve (block path) at the tuned endpoint
        auto spec = build_state_conditioning(n, best);
        auto channels = build_error_channels(spec.layout, best, ErrorModel::QubitFlips);
        auto rep = solve_block(spec, channels);
        errs[i++] = 1.0 - rep.ghz_fidelity;
    }
    const double ratio = errs[0] / errs[1];
    const double target = std::cbrt(100.0); // 4.64...
    ok &= within_factor(ratio, target, 2.0);
    report(6, "state-conditioning error follows (kp/kr)^(1/3)", ok,
           "err(1e4)=" + exp_detail::fmt17(errs[0]) + " err(1e6)=" + exp_detail::fmt17(errs[1]) +
               " ratio=" + exp_detail::fmt17(ratio));
}

// --- 7. structural property suite -------------------------------------------
void criterion7() {
    bool ok = true;
    std::string detail;

    // steady-state structure across schemes
    {
        RateSet r;
        r.kappa_u = r.kappa_t = 1e-3;
        r.kappa_d = 3e-2;
        r.kappa_c = 0.3;
        r.kappa_st = r.kappa_r = r.kappa_f = 10.0;
        r.kappa_p = 1e-5;
        r.kappa_x = r.kappa_z = r.kappa_p / 2;
        const std::pair<SchemeId, int> cases[] = {
            {SchemeId::StateCond, 2},        {SchemeId::StateCondTripartite, 3},
            {SchemeId::JumpCondBipartite, 2}, {SchemeId::WaveBipartite, 2},
            {SchemeId::WaveTriQubitAncilla, 3}, {SchemeId::WaveTriJump, 3},
            {SchemeId::QutritWave, 3},       {SchemeId::IdealClock, 2},
        };
        for (auto [id, n] : cases) {
            auto spec = build_scheme(id, n, r);
            const ErrorModel model = id == SchemeId::QutritWave ? ErrorModel::QutritDepolarizing
                                                                : ErrorModel::QubitFlips;
            auto errsv = build_error_channels(spec.layout, r, model);
            auto rep = solve_steady_state(spec, errsv);
            bool here = rep.residual <= 1e-8 && rep.min_eigenvalue >= -1e-8 &&
                        rep.trace_error <= 1e-9;
            if (rep.rho.size() > 0) here &= (rep.rho - rep.rho.adjoint()).norm() <= 1e-10;
            if (!here) detail += std::string("structure:") + scheme_name(id) + " ";
            ok &= here;
        }
    }
    // generators conserve probability
    {
        RateSet r;
        r.kappa_u = r.kappa_t = 1e-3;
        r.kappa_d = 3e-2;
        r.kappa_c = 0.3;
        r.kappa_st = r.kappa_r = r.kappa_f = 10.0;
        r.kappa_p = 1e-5;
        std::vector<CtmcModel> models;
        models.push_back(build_ancilla_clock_ctmc(4, r));
        models.push_back(build_ancilla_clock_ctmc(3, r, ClockVariant::FourLevelJumpCond));
        models.push_back(build_reduced_state_cond_chain(4, r));
        models.push_back(build_qutrit_aggregate_chain(4, r));
        models.push_back(build_qutrit_sequential_chain(4, r).first);
        models.push_back(build_qutrit_wave_chain_full(4, r));
        for (const auto& m : models) {
            Eigen::VectorXd colsum = Eigen::VectorXd::Zero(m.num_states());
            double minoff = 0.0;
            for (long k = 0; k < m.generator.outerSize(); ++k)
                for (SparseMatrixD::InnerIterator it(m.generator, k); it; ++it) {
                    colsum(it.col()) += it.value();
                    if (it.row() != it.col()) minoff = std::min(minoff, it.value());
                }
            bool here = colsum.cwiseAbs().maxCoeff() <= 1e-12 && minoff >= 0.0;
            if (!here) detail += "colsum ";
            ok &= here;
        }
    }
    // frontier monotonicity and absorption, 1000 seeded trajectories, n <= 6
    {
        auto rep = verify_frontier_convergence(6, 1000, 20240815);
        bool here = rep.all_absorbed && rep.monotone;
        if (!here) detail += "frontier ";
        ok &= here;
    }
    // ancilla-coherence audit for every ancilla-bearing scheme
    {
        RateSet r;
        r.kappa_u = r.kappa_t = 1e-3;
        r.kappa_d = 3e-2;
        r.kappa_c = 0.3;
        r.kappa_st = r.kappa_r = r.kappa_f = 10.0;
        for (auto id : {SchemeId::IdealClock, SchemeId::StateCond, SchemeId::StateCondTripartite,
                        SchemeId::JumpCondPrelim, SchemeId::JumpCondBipartite,
                        SchemeId::WaveTriJump, SchemeId::WaveTriQubitAncilla,
                        SchemeId::WaveBipartite}) {
            bool here = ancilla_classical_audit(build_scheme(id, 3, r)).passed;
            if (!here) detail += std::string("audit:") + scheme_name(id) + " ";
            ok &= here;
        }
    }
    // block vs full at n=3
    {
        RateSet r;
        r.kappa_u = r.kappa_t = 2e-3;
        r.kappa_d = 5e-2;
        r.kappa_c = 0.3;
        r.kappa_st = r.kappa_r = 10.0;
        r.kappa_p = 1e-5;
        r.kappa_x = r.kappa_z = r.kappa_p / 2;
        auto spec = build_state_conditioning(3, r);
        auto channels = build_error_channels(spec.layout, r, ErrorModel::QubitFlips);
        SolverConfig full_cfg;
        full_cfg.method = SolveMethod::SparseIterative;
        auto full = solve_steady_state(spec, channels, full_cfg);
        auto block = solve_block(spec, channels);
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(full.rho - block.rho, Eigen::EigenvaluesOnly);
        const double td = 0.5 * es.eigenvalues().cwiseAbs().sum();
        bool here = td <= 1e-8;
        if (!here) detail += "block-vs-full ";
        ok &= here;
    }
    // companion completeness: channel sums are kappa times a projector
    {
        RateSet r;
        r.kappa_u = r.kappa_t = 1e-3;
        r.kappa_d = 3e-2;
        r.kappa_c = 0.3;
        r.kappa_st = r.kappa_r = 10.0;
        r.kappa_p = 0.0;
        auto spec = build_state_conditioning(3, r, /*companions=*/true);
        std::map<std::string, DenseMatrix> sums;
        for (const auto& c : spec.collapse_ops) {
            if (c.label.find('+') == std::string::npos && c.label.find('L') == std::string::npos)
                continue;
            DenseMatrix m = c.op.amplitude * c.op.matrix;
            auto [it, fresh] = sums.try_emplace(c.label, DenseMatrix::Zero(m.cols(), m.cols()));
            it->second += m.adjoint() * m;
        }
        for (const auto& [label, sum] : sums) {
            const double kappa = label.find('L') != std::string::npos ? r.kappa_c : r.kappa_r;
            // sum must equal kappa times a projector: sum^2 = kappa sum
            bool here = (sum * sum - kappa * sum).norm() <= 1e-10 * kappa * kappa;
            if (!here) detail += "companions:" + label + " ";
            ok &= here;
        }
    }
    report(7, "structural property suite", ok, detail.empty() ? "all checks" : detail);
}

// --- 8. sequential chain closed form ----------------------------------------
void criterion8() {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    bool ok = true;
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n)
        for (int trial = 0; trial < 5; ++trial) {
            RateSet r;
            r.kappa_st = std::pow(10.0, u(rng));
            r.kappa_c = std::pow(10.0, u(rng));
            r.kappa_u = 1e-2 * std::pow(10.0, u(rng));
            r.kappa_p = 1e-4 * std::pow(10.0, u(rng));
            auto [model, closed] = build_qutrit_sequential_chain(n, r);
            auto rep = ctmc_stationary(model);
            worst = std::max(worst, std::abs(rep.distribution(model.index_of("GHZ")) - closed));
        }
    ok &= worst <= 1e-10;

    // first-order expansion vs the wave estimate
    double worst_fo = 0.0;
    for (int n = 2; n <= 6; ++n) {
        RateSet r;
        r.kappa_st = 1.0;
        r.kappa_c = 0.5;
        r.kappa_u = 1e-4;
        r.kappa_p = 1e-8;
        auto closed = build_qutrit_sequential_chain(n, r).second;
        const double eps = r.kappa_u / r.kappa_st;
        const double eps_p = r.kappa_p / r.kappa_u;
        const double gamma = r.kappa_c / r.kappa_st;
        const double first_order = 1.0 - n * eps_p - n * eps - (n - 1) * eps / gamma;
        const double second_order = 20.0 * (n * eps / std::min(1.0, gamma)) *
                                    (n * eps / std::min(1.0, gamma));
        worst_fo = std::max(worst_fo, std::abs(closed - first_order) - second_order);
    }
    ok &= worst_fo <= 0.0;
    report(8, "sequential-chain product closed form", ok,
           "max |solve-closed|=" + exp_detail::fmt17(worst));
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    if (g_failures == 0) {
        std::printf("acceptance: all 8 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria failed\n", g_failures);
    return 1;
}
