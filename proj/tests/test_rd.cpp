#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "authguess/errors.hpp"
#include "authguess/prob.hpp"
#include "authguess/rd.hpp"

using namespace authguess;

namespace {

double h2(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

double mutual_information(const Pmf& q, const std::vector<std::vector<double>>& channel) {
    std::size_t ys = channel.at(0).size();
    std::vector<double> out(ys, 0.0);
    for (std::size_t x = 0; x < q.size(); ++x) {
        for (std::size_t y = 0; y < ys; ++y) out[y] += q[x] * channel[x][y];
    }
    double mi = 0.0;
    for (std::size_t x = 0; x < q.size(); ++x) {
        for (std::size_t y = 0; y < ys; ++y) {
            double joint = q[x] * channel[x][y];
            if (joint > 0.0) mi += joint * std::log(channel[x][y] / out[y]);
        }
    }
    return mi;
}

double expected_distortion(const Pmf& q, const std::vector<std::vector<double>>& channel,
                           const DistortionSpec& d) {
    double e = 0.0;
    for (std::size_t x = 0; x < q.size(); ++x) {
        for (std::size_t y = 0; y < d.y_size(); ++y) e += q[x] * channel[x][y] * d(x, y);
    }
    return e;
}

}  // namespace

TEST_CASE("binary hamming closed form") {
    auto ham = DistortionSpec::hamming(2);
    RdResult r = rate_distortion(Pmf({0.7, 0.3}), ham, 0.1);
    CHECK(r.converged);
    CHECK(r.rate == doctest::Approx(h2(0.3) - h2(0.1)).epsilon(1e-6));
    CHECK(r.rate == doctest::Approx(0.285781).epsilon(1e-5));
    CHECK(r.achieved_d <= 0.1 + 1e-8);
}

TEST_CASE("random binary sources match h(p) - h(D)") {
    auto ham = DistortionSpec::hamming(2);
    std::mt19937_64 rng(42);
    for (int i = 0; i < 20; ++i) {
        double p = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        double dmin = std::min(p, 1.0 - p);
        double D = std::uniform_real_distribution<double>(0.01 * dmin, 0.99 * dmin)(rng);
        RdResult r = rate_distortion(Pmf({p, 1.0 - p}), ham, D);
        CHECK(r.converged);
        CHECK(r.rate == doctest::Approx(h2(p) - h2(D)).epsilon(1e-6));
    }
}

TEST_CASE("endpoints") {
    auto ham = DistortionSpec::hamming(2);
    Pmf u({0.5, 0.5});
    CHECK(rate_distortion(u, ham, 0.0).rate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(distortion_at_zero_rate(Pmf({0.7, 0.3}), ham) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(rate_distortion(Pmf({0.7, 0.3}), ham, 0.3).rate == 0.0);
    CHECK(rate_distortion(Pmf({0.7, 0.3}), ham, 0.8).rate == 0.0);
    CHECK_THROWS_AS(rate_distortion(u, ham, -0.1), InvalidInputError);
}

TEST_CASE("returned channel is consistent") {
    auto ham = DistortionSpec::hamming(2);
    Pmf q({0.6, 0.4});
    for (double D : {0.0, 0.05, 0.15, 0.3}) {
        RdResult r = rate_distortion(q, ham, D);
        REQUIRE(r.test_channel.size() == 2);
        for (const auto& row : r.test_channel) {
            double s = 0.0;
            for (double v : row) s += v;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
        }
        CHECK(mutual_information(q, r.test_channel) == doctest::Approx(r.rate).epsilon(1e-6));
        CHECK(expected_distortion(q, r.test_channel, ham) <= D + 1e-8);
    }
}

TEST_CASE("rd curve properties") {
    auto ham = DistortionSpec::hamming(2);
    Pmf u({0.5, 0.5});
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.05 * i);
    auto curve = rd_curve(u, ham, grid);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(curve[i].rate == doctest::Approx(std::log(2.0) - h2(grid[i])).epsilon(1e-6));
        CHECK(curve[i].rate <= shannon_entropy(u) + 1e-12);
        if (i > 0) CHECK(curve[i].rate <= curve[i - 1].rate + 1e-9);
    }
    // Convexity: discrete second differences of R along the grid.
    for (std::size_t i = 2; i < curve.size(); ++i) {
        double second = curve[i].rate - 2.0 * curve[i - 1].rate + curve[i - 2].rate;
        CHECK(second >= -1e-6);
    }
    // Repeated grid values give identical rates.
    auto twice = rd_curve(u, ham, {0.1, 0.1});
    CHECK(twice[0].rate == twice[1].rate);
    CHECK_THROWS_AS(rd_curve(u, ham, {0.2, 0.1}), InvalidInputError);
}

TEST_CASE("blahut-arimoto objective is monotone within a run") {
    auto ham = DistortionSpec::hamming(3);
    std::vector<double> p{0.6, 0.3, 0.1};
    std::vector<double> dmat;
    for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t y = 0; y < 3; ++y) dmat.push_back(ham(x, y));
    }
    for (double slope : {0.5, 1.5, 4.0}) {
        RdOptions opts;
        std::vector<double> trace;
        opts.objective_trace = &trace;
        auto sol = detail::ba_fixed_slope(p, 3, dmat, slope, opts);
        CHECK(sol.converged);
        REQUIRE(trace.size() > 2);
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
    }
}

TEST_CASE("conditional rd") {
    auto ham = DistortionSpec::hamming(2);

    // Z = X: the decoder already knows the source.
    JointPmf diag(2, 2, {0.5, 0.0, 0.0, 0.5});
    for (double D : {0.0, 0.1, 0.4}) {
        CHECK(conditional_rate_distortion(diag, ham, D).rate ==
              doctest::Approx(0.0).epsilon(1e-9));
    }

    // Independent Z: conditioning collapses to the marginal problem.
    JointPmf prod(2, 2, {0.21, 0.49, 0.09, 0.21});  // X=(0.7,0.3), Z=(0.3,0.7)
    for (double D : {0.0, 0.1, 0.2}) {
        double cond = conditional_rate_distortion(prod, ham, D).rate;
        double marg = rate_distortion(prod.x_marginal(), ham, D).rate;
        CHECK(cond == doctest::Approx(marg).epsilon(1e-6));
    }

    // Binary symmetric pair with crossover 0.1: R_{X|Z}(0) = H(X|Z) = h(0.1).
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    CHECK(conditional_rate_distortion(bsc, ham, 0.0).rate ==
          doctest::Approx(h2(0.1)).epsilon(1e-9));
    CHECK(h2(0.1) == doctest::Approx(0.325083).epsilon(1e-5));
}

TEST_CASE("side information never increases the rate") {
    auto ham = DistortionSpec::hamming(2);
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> cells(4);
        double s = 0.0;
        for (auto& c : cells) {
            c = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
            s += c;
        }
        for (auto& c : cells) c /= s;
        double s2 = cells[0] + cells[1] + cells[2] + cells[3];
        cells[3] += 1.0 - s2;
        JointPmf joint(2, 2, cells);
        for (double D : {0.0, 0.1, 0.25}) {
            double cond = conditional_rate_distortion(joint, ham, D).rate;
            double marg = rate_distortion(joint.x_marginal(), ham, D).rate;
            CHECK(cond <= marg + 1e-7);
        }
    }
}

TEST_CASE("value-only variants agree with the full solvers") {
    auto ham = DistortionSpec::hamming(2);
    Pmf q({0.55, 0.45});
    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    for (double D : {0.0, 0.08, 0.2, 0.45}) {
        CHECK(rate_distortion_value(q, ham, D) ==
              doctest::Approx(rate_distortion(q, ham, D).rate).epsilon(1e-9));
        CHECK(conditional_rate_distortion_value(bsc, ham, D) ==
              doctest::Approx(conditional_rate_distortion(bsc, ham, D).rate).epsilon(1e-9));
    }
}

TEST_CASE("zero-mass source symbols are dropped cleanly") {
    auto ham = DistortionSpec::hamming(3);
    Pmf q({0.7, 0.3, 0.0});
    RdResult r = rate_distortion(q, ham, 0.1);
    CHECK(r.rate == doctest::Approx(h2(0.3) - h2(0.1)).epsilon(1e-6));
    REQUIRE(r.test_channel.size() == 3);  // full-alphabet channel is still returned
}
