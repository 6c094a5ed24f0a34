#include <catch_amalgamated.hpp>

#include <random>

#include "ghzres/signal_chain.hpp"

using namespace ghzres;

namespace {

RateSet separated_rates(std::mt19937_64& rng) {
    // T3 << T2 << T1 << T0 with three-decade separations, jittered
    std::uniform_real_distribution<double> j(-0.3, 0.3);
    auto f = [&] { return std::pow(10.0, j(rng)); };
    RateSet r;
    r.kappa_r = r.kappa_st = 1.0;
    r.kappa_d = 1e-3 * f();
    r.kappa_c = 1e-3 * f();
    r.kappa_u = r.kappa_d * 1e-3 * f();
    r.kappa_t = r.kappa_d * 1e-3 * f();
    r.kappa_p = r.kappa_u * 1e-3 * f();
    return r;
}

} // namespace

TEST_CASE("effective up-rate is the harmonic mean of kappa_u and kappa_t") {
    RateSet r;
    r.kappa_u = r.kappa_t = 2.0;
    REQUIRE(effective_up_rate(r) == Catch::Approx(1.0).epsilon(1e-14));
    r.kappa_t = 1e12;
    REQUIRE(effective_up_rate(r) == Catch::Approx(r.kappa_u).epsilon(1e-9));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int i = 0; i < 20; ++i) {
        r.kappa_u = u(rng);
        r.kappa_t = u(rng);
        const double oracle = (r.kappa_u * r.kappa_t) / (r.kappa_u + r.kappa_t);
        REQUIRE(effective_up_rate(r) == Catch::Approx(oracle).epsilon(1e-13));
    }
}

TEST_CASE("reduced chain: state count and conservation") {
    std::mt19937_64 rng(7);
    auto r = separated_rates(rng);
    auto model = build_reduced_state_cond_chain(3, r);
    REQUIRE(model.num_states() == 14); // 2 (3 R + 2 G + GHZ + E)
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(model.num_states());
    for (long k = 0; k < model.generator.outerSize(); ++k)
        for (SparseMatrixD::InnerIterator it(model.generator, k); it; ++it)
            colsum(it.col()) += it.value();
    REQUIRE(colsum.cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE_THROWS_AS(build_reduced_state_cond_chain(2, r), std::invalid_argument);
}

TEST_CASE("llp recursions equal the chain's linear solve") {
    std::mt19937_64 rng(42);
    for (int n : {3, 4, 5}) {
        for (int trial = 0; trial < 5; ++trial) {
            auto r = separated_rates(rng);
            auto model = build_reduced_state_cond_chain(n, r);
            auto lin = ctmc_stationary(model);
            auto rec = llp_exact(n, r);
            for (const auto& [label, value] : rec.populations) {
                const double got = lin.distribution(model.index_of(label));
                INFO("n=" << n << " " << label);
                REQUIRE(std::abs(got - value) < 1e-9);
            }
            const double ghz_lin = lin.distribution(model.index_of("GHZ^e")) +
                                   lin.distribution(model.index_of("GHZ^mg"));
            REQUIRE(std::abs(ghz_lin - rec.p_ghz_total) < 1e-9);

            const double lead = llp_leading_order(n, r);
            REQUIRE(std::abs(lead - ghz_lin) <= 0.1 * (1.0 - ghz_lin));
        }
    }
}

TEST_CASE("llp limits: a0 and p_Rn^e") {
    // a0 -> (n-1) kc + n kd as kp -> 0 and ktu -> 0
    const int n = 4;
    RateSet r;
    r.kappa_r = r.kappa_st = 1.0;
    r.kappa_d = 1e-3;
    r.kappa_c = 2e-3;
    r.kappa_u = r.kappa_t = 1e-12;
    r.kappa_p = 0.0;
    auto rep = llp_exact(n, r);
    // reconstruct a0 from the recursion inputs
    const double ktu = effective_up_rate(r);
    const double a0 = n * r.kappa_p + (n - 1) * r.kappa_c +
                      n * r.kappa_d * (r.kappa_p + (n - 1.0) / n * r.kappa_c) /
                          (r.kappa_p + (n - 1.0) / n * r.kappa_c + ktu);
    REQUIRE(a0 == Catch::Approx((n - 1) * r.kappa_c + n * r.kappa_d).epsilon(1e-6));

    // p_{R_n^e} -> p_e as kappa_r -> infinity
    RateSet r2;
    r2.kappa_r = 1e9;
    r2.kappa_st = 1.0;
    r2.kappa_d = 1e-3;
    r2.kappa_c = 1e-3;
    r2.kappa_u = r2.kappa_t = 1e-6;
    r2.kappa_p = 1e-9;
    auto rep2 = llp_exact(3, r2);
    const double pe = effective_up_rate(r2) / (effective_up_rate(r2) + r2.kappa_d);
    REQUIRE(rep2.populations.at("R3^e") == Catch::Approx(pe).epsilon(1e-4));
    (void)rep;
}

TEST_CASE("leading-order formula at the quoted operating point") {
    RateSet r;
    r.kappa_p = 1e-6;
    r.kappa_u = r.kappa_t = 2e-4; // ktu = 1e-4
    r.kappa_d = r.kappa_c = 1e-2;
    r.kappa_r = 1.0;
    const double p = llp_leading_order(3, r);
    const double expect = 1.0 - 0.01 - 0.06 - 0.01 - 3 * std::log(3.0) * 0.02;
    REQUIRE(p == Catch::Approx(expect).epsilon(1e-12));
    REQUIRE(p == Catch::Approx(0.854).margin(5e-4));
}

TEST_CASE("optimal state-conditioning rates and predicted scaling") {
    auto [r, predicted] = optimal_rates_state_cond(3, 1e6, 1.0);
    REQUIRE(effective_up_rate(r) == Catch::Approx(46.5912482486).epsilon(1e-9));
    // predicted error = (n^{7/2} ln n kp/kr)^{1/3}
    REQUIRE(predicted == Catch::Approx(std::cbrt(std::pow(3.0, 3.5) * std::log(3.0) * 1e-6)).epsilon(1e-12));
    // ordering ktu << kd << kr holds for kr/kp >= 1e3
    for (double ratio : {1e3, 1e4, 1e6, 1e9}) {
        auto [rr, pp] = optimal_rates_state_cond(3, ratio, 1.0);
        REQUIRE(effective_up_rate(rr) < rr.kappa_d);
        REQUIRE(rr.kappa_d < rr.kappa_r);
        (void)pp;
    }
}

TEST_CASE("imperfect synchronization correction") {
    RateSet r;
    r.kappa_p = 1e-6;
    r.kappa_u = r.kappa_t = 2e-4;
    r.kappa_d = r.kappa_c = 1e-2;
    r.kappa_r = r.kappa_st = 1.0;
    const int n = 3;

    // eta2 kappa_st -> infinity reduces to the leading order
    RateSet rinf = r;
    rinf.kappa_st = 1e12;
    REQUIRE(imperfect_sync_correction(n, rinf).p_ghz ==
            Catch::Approx(llp_leading_order(n, rinf)).margin(1e-10));

    // finite kappa_st adds (n-1)(kc+kd)/(eta2 kst)
    const auto corr = imperfect_sync_correction(n, r, 1.0);
    const double expect = llp_leading_order(n, r) - (n - 1) * (r.kappa_c + r.kappa_d) / r.kappa_st;
    REQUIRE(corr.p_ghz == Catch::Approx(expect).epsilon(1e-12));

    // kappa_hat_u never exceeds the summarized rate
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 50; ++i) {
        RateSet rr = r;
        rr.kappa_u = u(rng);
        rr.kappa_t = u(rng);
        rr.kappa_st = u(rng) * 100;
        const auto c = imperfect_sync_correction(n, rr, 1.0);
        REQUIRE(c.kappa_hat_u <= effective_up_rate(rr) * (1 + 1e-12));
    }
}
