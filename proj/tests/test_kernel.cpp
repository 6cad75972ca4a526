#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "phaseavg/kernel.hpp"
#include "support/oracles.hpp"

using namespace phaseavg;

TEST_CASE("eta = 0 degenerates to pointwise evaluation") {
    const auto k = build_kernel(0.0, 4.0, 1);
    CHECK(k.size() == 1);
    CHECK(k.node(0) == 0.0);
    CHECK(k.weight(0) == 1.0);
    // Any requested node count degenerates the same way.
    const auto k5 = build_kernel(0.0, 4.0, 5);
    CHECK(k5.size() == 1);
    CHECK(k5.weight(0) == 1.0);
}

TEST_CASE("small kernel: symmetry, normalisation, peak at the centre") {
    const auto k = build_kernel(1.0, 4.0, 5);
    REQUIRE(k.size() == 5);
    CHECK(oracles::kahan_sum(k.weights()) == doctest::Approx(1.0).epsilon(1e-15));
    for (int i = 0; i < 5; ++i) {
        CHECK(k.node(i) == -k.node(4 - i));
        CHECK(k.weight(i) == k.weight(4 - i));  // bitwise by construction
        CHECK(k.weight(i) > 0.0);
    }
    CHECK(k.node(2) == 0.0);
    for (int i = 0; i < 5; ++i) CHECK(k.weight(2) >= k.weight(i));
}

TEST_CASE("kernel invariants across parameter combinations") {
    for (double eta : {0.1, 1.0, 7.5}) {
        for (double gamma : {1.0, 4.0}) {
            for (int count : {2, 9, 64, 201}) {
                const auto k = build_kernel(eta, gamma, count);
                CHECK(std::abs(oracles::kahan_sum(k.weights()) - 1.0) < 1e-15);
                const double bound = eta * (2.0 * count - 1.0) / (4.0 * count);
                double peak = 0.0;
                for (int i = 0; i < count; ++i) {
                    CHECK(k.node(i) == -k.node(count - 1 - i));
                    CHECK(k.weight(i) == k.weight(count - 1 - i));
                    // Edge weights may underflow to zero for extreme
                    // eta/K ratios; they are never negative.
                    CHECK(k.weight(i) >= 0.0);
                    peak = std::max(peak, k.weight(i));
                    CHECK(std::abs(k.node(i)) <= bound);
                    CHECK(bound < eta / 2.0);
                }
                CHECK(peak > 0.0);
            }
        }
    }
    // Away from the underflow regime every weight is strictly positive.
    const auto k = build_kernel(1.0, 4.0, 64);
    for (double w : k.weights()) CHECK(w > 0.0);
}

TEST_CASE("kernel invariants hold for randomly drawn parameters") {
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> eta_dist(0.05, 20.0);
    std::uniform_real_distribution<double> gamma_dist(0.5, 8.0);
    std::uniform_int_distribution<int> count_dist(1, 700);
    for (int draw = 0; draw < 60; ++draw) {
        const double eta = eta_dist(rng);
        const double gamma = gamma_dist(rng);
        const int count = count_dist(rng);
        const auto k = build_kernel(eta, gamma, count);
        CHECK(std::abs(oracles::kahan_sum(k.weights()) - 1.0) < 1e-15);
        for (int i = 0; i < count; ++i) {
            CHECK(k.node(i) == -k.node(count - 1 - i));
            CHECK(k.weight(i) == k.weight(count - 1 - i));
            CHECK(std::abs(k.node(i)) < eta / 2.0);
        }
        // The discrete average of a pure oscillation stays real and bounded.
        std::complex<double> chi = 0.0;
        const double omega = gamma;  // arbitrary nonzero frequency
        for (int i = 0; i < count; ++i)
            chi += k.weight(i) * std::exp(std::complex<double>{0.0, omega * k.node(i)});
        CHECK(std::abs(chi.imag()) < 1e-12);
        CHECK(std::abs(chi) <= 1.0 + 1e-13);
    }
}

TEST_CASE("continuous kernel vanishes at the window edge") {
    CHECK(bump_kernel_unnormalised(1.0, 4.0, 0.5) == 0.0);
    CHECK(bump_kernel_unnormalised(1.0, 4.0, -0.5) == 0.0);
    CHECK(bump_kernel_unnormalised(1.0, 4.0, 0.75) == 0.0);
    CHECK(bump_kernel_unnormalised(1.0, 4.0, 0.0) > 0.0);
}

TEST_CASE("discrete moments match adaptive quadrature of the bump kernel") {
    const double eta = 1.0, gamma = 4.0;
    const auto k = build_kernel(eta, gamma, 201);

    double first = 0.0, second = 0.0;
    for (int i = 0; i < k.size(); ++i) {
        first += k.weight(i) * k.node(i);
        second += k.weight(i) * k.node(i) * k.node(i);
    }
    CHECK(std::abs(first) < 1e-12);

    auto raw = [&](double s) { return bump_kernel_unnormalised(eta, gamma, s); };
    const double norm = oracles::adaptive_simpson(raw, -eta / 2, eta / 2, 1e-12);
    const double moment2 =
        oracles::adaptive_simpson([&](double s) { return raw(s) * s * s; }, -eta / 2,
                                  eta / 2, 1e-12) /
        norm;
    CHECK(std::abs(second - moment2) < 1e-6);
}

TEST_CASE("sample_count follows the ceiling rule") {
    const double pi = std::numbers::pi;
    // ceil(4 * pi * 2 pi / (2 pi)) = ceil(4 pi) = 13 before the floor.
    CHECK(sample_count(pi, 2.0 * pi, 1.0, 4.0, 1) == 13);
    CHECK(sample_count(pi, 2.0 * pi, 1.0, 4.0, 20) == 20);
    CHECK(sample_count(0.0, 2.0 * pi, 1.0, 4.0, 8) == 1);
    // Halving eps doubles the pre-floor count.
    const int k1 = sample_count(1.0, 8.0, 0.1, 4.0, 1);
    const int k2 = sample_count(1.0, 8.0, 0.05, 4.0, 1);
    CHECK(k2 == 2 * k1);

    CHECK_THROWS_AS((void)build_kernel(1.0, 4.0, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)build_kernel(-1.0, 4.0, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)sample_count(-1.0, 1.0, 1.0, 4.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)sample_count(1.0, -1.0, 1.0, 4.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)sample_count(1.0, 1.0, 0.0, 4.0, 1), std::invalid_argument);
}

TEST_CASE("discrete average of a pure oscillation is real with |chi| <= 1") {
    for (double eta : {0.25, 1.0, 4.0}) {
        const auto k = build_kernel_for(eta, 2.0, 0.1, KernelParams{});
        for (double omega : {0.5, 2.0, 17.0}) {
            std::complex<double> chi = 0.0;
            for (int i = 0; i < k.size(); ++i)
                chi += k.weight(i) *
                       std::exp(std::complex<double>{0.0, omega * k.node(i) / 0.1});
            CHECK(std::abs(chi.imag()) < 1e-13);
            CHECK(std::abs(chi) <= 1.0 + 1e-14);
        }
    }
    // chi(eta = 0) = 1 exactly.
    const auto k0 = build_kernel(0.0, 4.0, 1);
    std::complex<double> chi0 = 0.0;
    for (int i = 0; i < k0.size(); ++i)
        chi0 += k0.weight(i) * std::exp(std::complex<double>{0.0, 3.0 * k0.node(i)});
    CHECK(chi0 == std::complex<double>{1.0, 0.0});
}

TEST_CASE("build_kernel_for wires the node-count rule through") {
    const KernelParams params{4.0, 4.0, 8};
    const auto k = build_kernel_for(1.0, 16.0, 0.1, params);
    CHECK(k.size() == sample_count(1.0, 16.0, 0.1, 4.0, 8));
    CHECK(k.size() >= 8);
}
