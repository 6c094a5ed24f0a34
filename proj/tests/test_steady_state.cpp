#include <catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "ghzres/steady_state.hpp"

using namespace ghzres;

namespace {

RateSet qutrit_rates(double ku_over_kst, double kp_over_kst = 0.0) {
    RateSet r;
    r.kappa_st = 1.0;
    r.kappa_c = 1.0;
    r.kappa_u = ku_over_kst;
    r.kappa_p = kp_over_kst;
    return r;
}

} // namespace

TEST_CASE("qutrit wave n=2 steady state reaches the wave-estimate fidelity") {
    const double eps = 1e-3;
    auto spec = build_qutrit_wave(2, qutrit_rates(eps));
    auto rep = solve_steady_state(spec);
    const int n = 2;
    REQUIRE(rep.ghz_fidelity >= 1.0 - 5.0 * (n * eps + (n - 1) * eps));
    REQUIRE(rep.residual < 1e-9);
    REQUIRE(std::abs(rep.trace_error) < 1e-9);
    REQUIRE(rep.min_eigenvalue > -1e-8);
}

TEST_CASE("LTV-only generator has a degenerate kernel") {
    RateSet r;
    r.kappa_c = 1.0;
    auto spec = build_ltv(3, r);
    REQUIRE_THROWS_AS(solve_steady_state(spec), KernelDegenerateError);
}

TEST_CASE("GHZ fidelity of |00..0> is one half") {
    auto layout = SubsystemLayout::qubits(3);
    DenseMatrix rho = DenseMatrix::Zero(8, 8);
    rho(0, 0) = 1.0;
    REQUIRE(ghz_fidelity(rho, layout) == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("ideal clock n=2 stabilizes past fidelity 1/2") {
    RateSet r;
    r.kappa_u = 1e-4;
    r.kappa_d = 1e-2;
    r.kappa_r = 1.0;
    r.kappa_c = 1e-2;
    auto spec = build_ideal_clock(2, r);
    auto rep = solve_steady_state(spec);
    REQUIRE(rep.ghz_fidelity > 0.5);
}

TEST_CASE("block solve agrees with the full solve") {
    RateSet r;
    r.kappa_u = r.kappa_t = 2e-3;
    r.kappa_d = 5e-2;
    r.kappa_c = 0.3;
    r.kappa_st = r.kappa_r = 10.0;
    r.kappa_p = 1e-5;
    r.kappa_x = r.kappa_z = r.kappa_p / 2;
    auto spec = build_state_conditioning(3, r);
    auto errs = build_error_channels(spec.layout, r, ErrorModel::QubitFlips);

    SolverConfig full_cfg;
    full_cfg.method = SolveMethod::SparseIterative;
    auto full = solve_steady_state(spec, errs, full_cfg);
    auto block = solve_block(spec, errs);

    REQUIRE(full.rho.size() > 0);
    REQUIRE(block.rho.size() > 0);
    const double trace_dist = 0.5 * (full.rho - block.rho).cwiseAbs().sum(); // bound via L1
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(full.rho - block.rho, Eigen::EigenvaluesOnly);
    const double td = 0.5 * es.eigenvalues().cwiseAbs().sum();
    REQUIRE(td <= 1e-8);
    REQUIRE(std::abs(full.ghz_fidelity - block.ghz_fidelity) < 1e-8);
    (void)trace_dist;

    // block unknown count advertised by the structure
    AncillaBlockStructure bs(spec, errs);
    REQUIRE(bs.anc_dim() * bs.data_dim() * bs.data_dim() == 1728);
    REQUIRE(spec.layout.total_dim() * spec.layout.total_dim() == 46656);
}

TEST_CASE("block solver refuses schemes that create ancilla coherence") {
    RateSet r;
    r.kappa_u = 0.1;
    r.kappa_d = 0.2;
    r.kappa_c = 0.5;
    r.kappa_r = 2.0;
    auto spec = build_ideal_clock(2, r);
    // corrupt one ancilla factor with a coherence-creating term
    DenseMatrix bad(2, 2);
    bad << 1.0, 0.0, 1.0, 0.0; // |g><g| + |e><g|: maps |g> to a superposition
    spec.collapse_ops.push_back({LocalOperator{{2}, bad, 0.1}, "clock", "bad"});
    REQUIRE_FALSE(ancilla_classical_audit(spec).passed);
    REQUIRE_THROWS_AS(solve_block(spec), AuditFailedError);
}

TEST_CASE("qutrit-wave steady state carries no coherence with level |2>") {
    auto spec = build_qutrit_wave(2, qutrit_rates(1e-3, 1e-6));
    auto errs = build_error_channels(spec.layout, spec.rates, ErrorModel::QutritDepolarizing);
    auto rep = solve_steady_state(spec, errs);
    const auto& rho = rep.rho;
    // <a|rho|2> on each site, a in {0,1}
    double worst = 0.0;
    for (int site = 0; site < 2; ++site) {
        const long stride = spec.layout.stride(site);
        for (long i = 0; i < 9; ++i)
            for (long j = 0; j < 9; ++j) {
                const int di = static_cast<int>((i / stride) % 3), dj = static_cast<int>((j / stride) % 3);
                if (dj == 2 && di != 2) worst = std::max(worst, std::abs(rho(i, j)));
            }
    }
    REQUIRE(worst < 1e-10);
}

TEST_CASE("fidelity invariant under ancilla level relabeling") {
    RateSet r;
    r.kappa_u = r.kappa_t = 1e-3;
    r.kappa_d = 3e-2;
    r.kappa_c = 0.2;
    r.kappa_st = r.kappa_r = 5.0;
    auto spec = build_state_conditioning(2, r);
    auto rep = solve_steady_state(spec);

    // shuffle ancilla levels g<->m on both ancillas by conjugating every op
    auto shuffled = spec;
    DenseMatrix P = DenseMatrix::Zero(3, 3);
    P(2, 0) = P(0, 2) = P(1, 1) = 1.0;
    for (auto& c : shuffled.collapse_ops) {
        DenseMatrix U = DenseMatrix::Identity(1, 1);
        for (int s : c.op.sites) {
            DenseMatrix us = spec.layout.site(s).role == SiteRole::Ancilla
                                 ? P
                                 : DenseMatrix::Identity(spec.layout.dim(s), spec.layout.dim(s));
            U = Eigen::kroneckerProduct(U, us).eval();
        }
        c.op.matrix = U * c.op.matrix * U.adjoint();
    }
    auto rep2 = solve_steady_state(shuffled);
    REQUIRE(rep.ghz_fidelity == Catch::Approx(rep2.ghz_fidelity).margin(1e-9));
}

TEST_CASE("time evolution holds the steady state and conserves trace") {
    auto spec = build_qutrit_wave(2, qutrit_rates(1e-2));
    auto rep = solve_steady_state(spec);
    const double dt = 0.05; // max rate is 1.0
    auto fids = time_evolve(spec, {}, rep.rho, dt, 1000);
    for (double f : fids) REQUIRE(std::abs(f - rep.ghz_fidelity) < 1e-8);

    // trace conservation along an arbitrary start
    DenseMatrix rho0 = DenseMatrix::Zero(9, 9);
    rho0(4, 4) = 1.0;
    LindbladianHandle h = assemble_lindbladian({}, spec.collapse_ops, spec.layout);
    DenseMatrix rho = rho0;
    for (int s = 0; s < 20; ++s) {
        DenseMatrix k1 = h.apply(rho), k2 = h.apply(rho + 0.5 * dt * k1),
                    k3 = h.apply(rho + 0.5 * dt * k2), k4 = h.apply(rho + dt * k3);
        DenseMatrix next = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        REQUIRE(std::abs(next.trace() - rho.trace()) < 1e-10);
        rho = next;
    }
}

TEST_CASE("time evolution converges to the null-space steady state") {
    RateSet r;
    r.kappa_u = 0.05;
    r.kappa_d = 0.5;
    r.kappa_r = 4.0;
    r.kappa_c = 0.5;
    auto spec = build_ideal_clock(2, r);
    auto target = solve_steady_state(spec);
    DenseMatrix rho0 = DenseMatrix::Zero(spec.layout.total_dim(), spec.layout.total_dim());
    rho0(0, 0) = 1.0; // |00> (x) |gg>
    const double dt = 0.02;
    const int steps = static_cast<int>(std::ceil(20.0 / r.kappa_u / dt));
    auto fids = time_evolve(spec, {}, rho0, dt, steps);
    REQUIRE(std::abs(fids.back() - target.ghz_fidelity) < 1e-8 * 10 + 1e-6);
}

TEST_CASE("time evolution rejects oversized steps") {
    auto spec = build_qutrit_wave(2, qutrit_rates(1e-2));
    DenseMatrix rho = DenseMatrix::Identity(9, 9);
    rho /= 9.0;
    REQUIRE_THROWS_AS(time_evolve(spec, {}, rho, 1.0, 1), std::invalid_argument);
}

TEST_CASE("rho binary dump round-trips through the header") {
    auto spec = build_qutrit_wave(2, qutrit_rates(1e-2));
    auto rep = solve_steady_state(spec);
    const std::string path = "rho_dump_test.bin";
    write_rho_dump(path, rep, spec);
    std::FILE* f = std::fopen(path.c_str(), "rb");
    REQUIRE(f != nullptr);
    char magic[4];
    REQUIRE(std::fread(magic, 1, 4, f) == 4);
    REQUIRE(std::string(magic, 4) == "GHZR");
    std::int32_t version, scheme, nsites;
    REQUIRE(std::fread(&version, 4, 1, f) == 1);
    REQUIRE(std::fread(&scheme, 4, 1, f) == 1);
    REQUIRE(std::fread(&nsites, 4, 1, f) == 1);
    REQUIRE(nsites == 2);
    std::int32_t d0, d1;
    std::fread(&d0, 4, 1, f);
    std::fread(&d1, 4, 1, f);
    REQUIRE((d0 == 3 && d1 == 3));
    double rates[10];
    REQUIRE(std::fread(rates, sizeof(double), 10, f) == 10);
    double re, im;
    std::fread(&re, 8, 1, f);
    std::fread(&im, 8, 1, f);
    REQUIRE(re == Catch::Approx(std::real(rep.rho(0, 0))));
    std::fclose(f);
    std::remove(path.c_str());
}

TEST_CASE("ideal clock with a dead trigger has a degenerate kernel") {
    RateSet r;
    r.kappa_u = 0.0;
    r.kappa_d = 0.5;
    r.kappa_r = 4.0;
    r.kappa_c = 0.5;
    auto spec = build_ideal_clock(2, r);
    REQUIRE_FALSE(spec.warnings.empty());
    SolverConfig cfg;
    cfg.method = SolveMethod::DenseNullSpace;
    REQUIRE_THROWS_AS(solve_steady_state(spec, {}, cfg), KernelDegenerateError);
}

TEST_CASE("tri qubit-ancilla wave stabilizes GHZ at kp = 0") {
    RateSet r;
    r.kappa_u = 1.0;
    r.kappa_st = r.kappa_c = 1e4;
    auto spec = build_wave_tri_qubit_ancilla(3, r);
    auto rep = solve_steady_state(spec);
    REQUIRE(rep.ghz_fidelity >= 1.0 - 5.0 * 3 * (r.kappa_u / r.kappa_st));
    REQUIRE(rep.min_eigenvalue > -1e-8);
}

TEST_CASE("one Lindbladian application preserves |2>-coherence freeness") {
    RateSet r;
    r.kappa_u = 0.2;
    r.kappa_st = r.kappa_c = 2.0;
    r.kappa_p = 0.01;
    auto spec = build_qutrit_wave(2, r);
    auto errs = build_error_channels(spec.layout, r, ErrorModel::QutritDepolarizing);
    auto all = spec.collapse_ops;
    all.insert(all.end(), errs.begin(), errs.end());
    auto handle = assemble_lindbladian({}, all, spec.layout);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    // random density, then zero every <a|.|2> cross block on both sites
    DenseMatrix m(9, 9);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) m(i, j) = cplx(g(rng), g(rng));
    DenseMatrix rho = m * m.adjoint();
    rho /= rho.trace();
    for (int site = 0; site < 2; ++site) {
        const long stride = spec.layout.stride(site);
        for (long i = 0; i < 9; ++i)
            for (long j = 0; j < 9; ++j) {
                const int di = static_cast<int>((i / stride) % 3);
                const int dj = static_cast<int>((j / stride) % 3);
                if ((dj == 2) != (di == 2)) rho(i, j) = 0.0;
            }
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    DenseMatrix out = handle.apply(rho);
    double worst = 0.0;
    for (int site = 0; site < 2; ++site) {
        const long stride = spec.layout.stride(site);
        for (long i = 0; i < 9; ++i)
            for (long j = 0; j < 9; ++j) {
                const int di = static_cast<int>((i / stride) % 3);
                const int dj = static_cast<int>((j / stride) % 3);
                if ((dj == 2) != (di == 2)) worst = std::max(worst, std::abs(out(i, j)));
            }
    }
    REQUIRE(worst < 1e-14);
}
