#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "entrosim/toric_static.hpp"

using namespace entrosim;

namespace {

const ToricParams kDeepPlateau{0.01, 1e-4, 5000.0, 50, 8, 1.0};

}

TEST_CASE("stabilizer expectation limits") {
    CHECK(stabilizer_expectation({1.0, 0.5, 2.0, 1, 4}) == 0.0);
    CHECK(stabilizer_expectation(kDeepPlateau) ==
          doctest::Approx(49.0 / 51.0).epsilon(1e-3));
    // large-M asymptote 1 - 2/M
    CHECK(stabilizer_expectation(kDeepPlateau) == doctest::Approx(0.96).epsilon(2e-3));
    // frozen limit: w+ = w- = 1
    CHECK(stabilizer_expectation({1e6, 0.5, 2.0, 10, 4}) == doctest::Approx(0.0));
}

TEST_CASE("wilson loop") {
    CHECK(wilson_loop(kDeepPlateau, 0) == 1.0);
    CHECK(wilson_loop(kDeepPlateau, 1) ==
          doctest::Approx(stabilizer_expectation(kDeepPlateau)));
    ToricParams big = kDeepPlateau;
    big.L = 16;
    CHECK(wilson_loop(big, 100) ==
          doctest::Approx(std::pow(49.0 / 51.0, 100)).epsilon(5e-2));
    CHECK_THROWS_AS(wilson_loop(kDeepPlateau, 65), std::invalid_argument);
    CHECK_THROWS_AS(wilson_loop(kDeepPlateau, -1), std::invalid_argument);
    // M = 1: every area-positive loop vanishes
    CHECK(wilson_loop({1.0, 0.5, 2.0, 1, 4}, 3) == 0.0);
}

TEST_CASE("wilson loop factorizes") {
    Rng rng(5);
    ToricParams p{1.0, 1e-3, 50.0, 50, 12, 1.0};
    for (int i = 0; i < 50; ++i) {
        p.beta = 0.1 + 3.0 * rng.uniform();
        p.M = 1 + static_cast<long>(rng.below(100));
        const long a = static_cast<long>(rng.below(70));
        const long b = static_cast<long>(rng.below(70));
        const double lhs = wilson_loop(p, a + b);
        const double rhs = wilson_loop(p, a) * wilson_loop(p, b);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("beta_eff") {
    CHECK(beta_eff({1.0, 0.5, 2.0, 1, 4}) == doctest::Approx(0.0));
    CHECK(beta_eff(kDeepPlateau) == doctest::Approx(0.5 * std::log(50.0)).epsilon(1e-3));
    // identity with (1/2) ln lambda over random draws
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        const ToricParams p{0.05 + 4.0 * rng.uniform(), 0.01 + rng.uniform(),
                            0.5 + 5.0 * rng.uniform(), 1 + static_cast<long>(rng.below(200)), 4,
                            1.0};
        const double direct = beta_eff(p);
        const double via_lambda = 0.5 * log_lambda_ratio(p.chain());
        CHECK(std::abs(direct - via_lambda) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("beta_eff is temperature independent across a deep plateau") {
    ToricParams p{1.0, 1e-6, 1000.0, 1000, 4, 1.0};
    double lo = 1e300, hi = -1e300;
    for (double beta = 0.01; beta <= 0.1001; beta *= 1.18) {
        p.beta = beta;
        const double v = beta_eff(p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK((hi - lo) / lo < 0.01);
}

TEST_CASE("bath threshold") {
    const auto t250 = bath_threshold(250);
    CHECK(t250.M_required == 250);
    CHECK(t250.m_qubits == 8);
    const auto t1 = bath_threshold(1);
    CHECK(t1.M_required == 1);
    CHECK(t1.m_qubits == 0);
    const auto t1024 = bath_threshold(1024);
    CHECK(t1024.M_required == 1024);
    CHECK(t1024.m_qubits == 10);
    CHECK_THROWS_AS(bath_threshold(0), std::invalid_argument);
}

TEST_CASE("defect probability and expectation identity") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        const ToricParams p{0.05 + 4.0 * rng.uniform(), 0.01 + rng.uniform(),
                            0.5 + 5.0 * rng.uniform(), 1 + static_cast<long>(rng.below(100)), 4,
                            1.0};
        const double q = defect_probability(p);
        CHECK(std::abs(1.0 - 2.0 * q - stabilizer_expectation(p)) < 1e-12);
    }
}

TEST_CASE("M = 1 sampler is uniform over even-parity configurations") {
    const ToricParams p{1.0, 0.5, 2.0, 1, 2, 1.0};
    CHECK(defect_probability(p) == doctest::Approx(0.5));
    Rng rng(99);
    long defects = 0;
    const long n = 20000;
    for (long i = 0; i < n; ++i) {
        const auto s = sample_stabilizers(p, rng);
        int par_p = 0, par_v = 0;
        for (const auto e : s.plaquette) par_p += e < 0;
        for (const auto e : s.vertex) par_v += e < 0;
        CHECK(par_p % 2 == 0);
        CHECK(par_v % 2 == 0);
        defects += par_p + par_v;
    }
    // q = 1/2, N = 4 per sector: conditional marginal is still 1/2
    const double density = static_cast<double>(defects) / (8.0 * static_cast<double>(n));
    CHECK(density == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sampler density matches the parity-conditioned marginal") {
    const ToricParams p{0.01, 1e-4, 5000.0, 8, 4, 1.0};
    const double q = defect_probability(p);
    const double target = conditional_defect_marginal(q, 16);
    Rng rng(123);
    long defects = 0;
    const long n = 50000;
    for (long i = 0; i < n; ++i) {
        const auto s = sample_stabilizers(p, rng);
        for (const auto e : s.plaquette) defects += e < 0;
        for (const auto e : s.vertex) defects += e < 0;
    }
    const double n_draws = 32.0 * static_cast<double>(n);
    const double density = static_cast<double>(defects) / n_draws;
    const double sigma = std::sqrt(target * (1.0 - target) / n_draws);
    CHECK(std::abs(density - target) < 4.0 * sigma);
}

TEST_CASE("conditional marginal reduces to q when the parity weight is negligible") {
    CHECK(conditional_defect_marginal(0.5, 64) == doctest::Approx(0.5).epsilon(1e-12));
    // q = 1/9 on 64 sites: (1-2q)^63 ~ 1e-7, correction invisible
    CHECK(conditional_defect_marginal(1.0 / 9.0, 64) ==
          doctest::Approx(1.0 / 9.0).epsilon(1e-5));
    // q = 1/51 on 64 sites: the constraint visibly depletes defects
    const double shifted = conditional_defect_marginal(1.0 / 51.0, 64);
    CHECK(shifted < 1.0 / 51.0 * 0.9);
    CHECK(shifted > 1.0 / 51.0 * 0.7);
}
