#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "authguess/errors.hpp"
#include "authguess/guessing.hpp"
#include "authguess/prob.hpp"
#include "authguess/side_info.hpp"

using namespace authguess;

TEST_CASE("diagonal source: side information reveals everything") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf diag(2, 2, {0.5, 0.0, 0.0, 0.5});
    SiStrategy s = build_si_strategy(4, diag, ham, 0.0);

    for (const Sequence& z : {Sequence{0, 0, 0, 0}, Sequence{0, 1, 1, 0}, Sequence{1, 1, 1, 1}}) {
        Strategy per_z = s.strategy_for(z);
        REQUIRE(!per_z.flat.empty());
        CHECK(per_z.flat.front() == z);  // Hamming zero image of z is z itself
        CHECK(si_counting_function(z, z, s, ham, 0.0) == 1);
    }
    AttackReport r = evaluate_si_attack(diag, s, ham, 0.0, SiMode::kExact);
    CHECK(r.mean_guesses == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.exponent_estimate == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("independent side information is useless") {
    auto ham = DistortionSpec::hamming(2);
    // X=(0.7,0.3) independent of Z=(0.4,0.6).
    JointPmf prod(2, 2, {0.28, 0.42, 0.12, 0.18});
    std::size_t n = 5;
    for (double D : {0.0, 0.2}) {
        SiStrategy s = build_si_strategy(n, prod, ham, D);
        Strategy marginal = build_strategy(n, prod.x_marginal(), ham, D);
        for (const Sequence& z :
             {Sequence{0, 0, 0, 0, 0}, Sequence{1, 0, 1, 1, 0}, Sequence{1, 1, 1, 1, 1}}) {
            CHECK(s.strategy_for(z) == marginal);
        }
        // Counting functions agree everywhere.
        for (const auto& x : enumerate_sequences(n, 2)) {
            Sequence z{0, 1, 0, 1, 0};
            CHECK(si_counting_function(x, z, s, ham, D) == counting_function(x, marginal, ham, D));
        }
    }
}

TEST_CASE("independent uniform pair reproduces the no-SI expectation") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf unif(2, 2, {0.25, 0.25, 0.25, 0.25});
    SiStrategy s = build_si_strategy(10, unif, ham, 0.0);
    AttackReport r = evaluate_si_attack(unif, s, ham, 0.0, SiMode::kExact, 0, 0, 2'000'000);
    CHECK(r.mean_guesses == doctest::Approx(512.5).epsilon(1e-9));
}

TEST_CASE("loose distortion budget accepts immediately") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    SiStrategy s = build_si_strategy(3, bsc, ham, 1.0);
    for (const auto& x : enumerate_sequences(3, 2)) {
        for (const auto& z : enumerate_sequences(3, 2)) {
            CHECK(si_counting_function(x, z, s, ham, 1.0) == 1);
        }
    }
}

TEST_CASE("per-z strategies are permutation consistent") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    SiStrategy s = build_si_strategy(4, bsc, ham, 0.25);
    Sequence za{0, 0, 1, 1};
    Sequence zb{1, 1, 0, 0};
    CHECK(s.strategy_for(za).flat.size() == s.strategy_for(zb).flat.size());
    // zb is za with the halves swapped; applying the same coordinate swap to
    // x must leave the counting function unchanged.
    for (const auto& x : enumerate_sequences(4, 2)) {
        Sequence swapped{x[2], x[3], x[0], x[1]};
        CHECK(si_counting_function(x, za, s, ham, 0.25) ==
              si_counting_function(swapped, zb, s, ham, 0.25));
    }
}

TEST_CASE("per-z coverage of jointly reachable sequences") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    std::size_t n = 4;
    SiStrategy s = build_si_strategy(n, bsc, ham, 0.25);
    for (const auto& z : enumerate_sequences(n, 2)) {
        for (const auto& x : enumerate_sequences(n, 2)) {
            // All (x,z) pairs have positive probability under this source.
            CHECK(si_counting_function(x, z, s, ham, 0.25).has_value());
        }
    }
}

TEST_CASE("side information never hurts the adversary") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    std::size_t n = 6;
    for (double D : {0.0, 0.25}) {
        SiStrategy si = build_si_strategy(n, bsc, ham, D);
        AttackReport with_z = evaluate_si_attack(bsc, si, ham, D, SiMode::kExact);
        Strategy marginal = build_strategy(n, bsc.x_marginal(), ham, D);
        AttackReport without =
            exact_expected_guesses(bsc.x_marginal(), marginal, ham, D);
        CHECK(with_z.exponent_estimate <= without.exponent_estimate + 1e-12);
    }
}

TEST_CASE("monte carlo agrees with exact and is reproducible") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    SiStrategy s = build_si_strategy(5, bsc, ham, 0.0);
    AttackReport exact = evaluate_si_attack(bsc, s, ham, 0.0, SiMode::kExact);
    AttackReport mc = evaluate_si_attack(bsc, s, ham, 0.0, SiMode::kMonteCarlo, 100000, 99);
    CHECK(std::abs(mc.mean_guesses - exact.mean_guesses) <= 5.0 * mc.std_error);
    AttackReport mc2 = evaluate_si_attack(bsc, s, ham, 0.0, SiMode::kMonteCarlo, 100000, 99);
    CHECK(mc.mean_guesses == mc2.mean_guesses);
    CHECK(mc.std_error == mc2.std_error);
}

TEST_CASE("exact mode size limit") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    SiStrategy s = build_si_strategy(4, bsc, ham, 0.25);
    CHECK_THROWS_AS(evaluate_si_attack(bsc, s, ham, 0.25, SiMode::kExact, 0, 0, 10),
                    SizeLimitError);
}

TEST_CASE("export carries one block per z") {
    auto ham = DistortionSpec::hamming(2);
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    SiStrategy s = build_si_strategy(3, bsc, ham, 0.0);
    std::string text = s.to_text();
    std::size_t blocks = 0;
    for (std::size_t pos = text.find("# z-block"); pos != std::string::npos;
         pos = text.find("# z-block", pos + 1)) {
        ++blocks;
    }
    CHECK(blocks == 8);  // all of {0,1}^3 is reachable
}
