// Acceptance suite: one line per criterion, PASS or FAIL, nonzero exit on
// any failure. Kept separate from the unit tests so the gate is explicit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "authguess/exponent.hpp"
#include "authguess/guessing.hpp"
#include "authguess/prob.hpp"
#include "authguess/rd.hpp"
#include "authguess/side_info.hpp"
#include "authguess/spec_io.hpp"

using namespace authguess;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& what, double seconds) {
    std::printf("criterion %d: %s — %s (%.1fs)\n", idx, ok ? "PASS" : "FAIL", what.c_str(),
                seconds);
    if (!ok) ++g_failures;
}

void run(int idx, const std::string& what, const std::function<bool(std::string&)>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(idx, ok, what + (detail.empty() ? "" : " [" + detail + "]"), secs);
}

double h2(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

const DistortionSpec& ham2() {
    static DistortionSpec d = DistortionSpec::hamming(2);
    return d;
}

// Highest converse bound over a q grid and a set of eps values.
double best_converse(const Pmf& p, double D, long n) {
    double best = -kInfinity;
    for (int i = 0; i < 50; ++i) {
        double q0 = (i + 0.5) / 50.0;
        Pmf q({q0, 1.0 - q0});
        for (double eps : {1.0, 0.3, 0.1}) {
            best = std::max(best, converse_lower_bound(q, p, ham2(), D, eps, n));
        }
    }
    return best;
}

bool criterion1(std::string& detail) {
    std::mt19937_64 rng(1001);
    for (int i = 0; i < 20; ++i) {
        double p = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        double dcap = std::min(p, 1.0 - p);
        double D = std::uniform_real_distribution<double>(0.02 * dcap, 0.98 * dcap)(rng);
        RdResult r = rate_distortion(Pmf({p, 1.0 - p}), ham2(), D);
        double want = h2(p) - h2(D);
        if (!r.converged || std::abs(r.rate - want) > 1e-6) {
            detail = "p=" + std::to_string(p) + " D=" + std::to_string(D);
            return false;
        }
    }
    return true;
}

bool criterion2(std::string& detail) {
    ExponentOptions opts;
    opts.grid_resolution = 0.005;
    std::mt19937_64 rng(1002);
    auto check = [&](const Pmf& p, const DistortionSpec& d) {
        double got = deception_exponent(p, d, 0.0, opts).value;
        return std::abs(got - renyi_half_entropy(p)) <= 1e-4;
    };
    for (int i = 0; i < 20; ++i) {
        double p0 = std::uniform_real_distribution<double>(0.02, 0.98)(rng);
        if (!check(Pmf({p0, 1.0 - p0}), ham2())) {
            detail = "binary trial " + std::to_string(i);
            return false;
        }
    }
    auto ham3 = DistortionSpec::hamming(3);
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v(3);
        double s = 0.0;
        for (auto& x : v) {
            x = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
            s += x;
        }
        for (auto& x : v) x /= s;
        v[2] += 1.0 - (v[0] + v[1] + v[2]);
        if (!check(Pmf(v), ham3)) {
            detail = "ternary trial " + std::to_string(i);
            return false;
        }
    }
    return true;
}

bool criterion3(std::string& detail) {
    Pmf u({0.5, 0.5});
    for (int i = 0; i <= 10; ++i) {
        double D = 0.05 * i;
        double got = deception_exponent(u, ham2(), D).value;
        if (std::abs(got - (std::log(2.0) - h2(D))) > 1e-3) {
            detail = "D=" + std::to_string(D);
            return false;
        }
    }
    double e11 = deception_exponent(u, ham2(), 0.11).value;
    if (std::abs(e11 - 0.3466) > 1e-3) {
        detail = "E(0.11)=" + std::to_string(e11);
        return false;
    }
    return std::abs(deception_exponent(u, ham2(), 0.5).value) <= 1e-9;
}

bool criterion4(std::string& detail) {
    Pmf u({0.5, 0.5});
    for (std::size_t n : {std::size_t{8}, std::size_t{10}, std::size_t{12}}) {
        for (double D : {0.0, 0.125, 0.25}) {
            Strategy s = build_strategy(n, u, ham2(), D);
            double delta = -kInfinity;
            for (const auto& seg : s.segments) delta = std::max(delta, seg.slack);
            double est = exact_expected_guesses(u, s, ham2(), D).exponent_estimate;
            double ed = deception_exponent(u, ham2(), D).value;
            double bound = ed + 2.0 * std::log(static_cast<double>(n) + 1.0) /
                                    static_cast<double>(n) +
                           delta;
            if (est > bound + 1e-12) {
                detail = "n=" + std::to_string(n) + " D=" + std::to_string(D) + " est=" +
                         std::to_string(est) + " bound=" + std::to_string(bound);
                return false;
            }
        }
    }
    return true;
}

bool criterion5(std::string& detail) {
    Pmf u({0.5, 0.5});
    std::mt19937_64 rng(1005);
    for (std::size_t n : {std::size_t{8}, std::size_t{10}, std::size_t{12}}) {
        for (double D : {0.0, 0.125, 0.25}) {
            double floor_bound = best_converse(u, D, static_cast<long>(n));
            std::vector<double> estimates;
            Strategy s = build_strategy(n, u, ham2(), D);
            estimates.push_back(exact_expected_guesses(u, s, ham2(), D).exponent_estimate);
            if (n == 8) {
                OracleResult o = oracle_best_strategy(u, ham2(), D, n);
                estimates.push_back(o.report.exponent_estimate);
                for (int r = 0; r < 50; ++r) {
                    Strategy shuffled = s;
                    shuffled.segments.clear();
                    std::shuffle(shuffled.flat.begin(), shuffled.flat.end(), rng);
                    estimates.push_back(
                        exact_expected_guesses(u, shuffled, ham2(), D).exponent_estimate);
                }
            }
            for (double est : estimates) {
                if (est < floor_bound - 1e-12) {
                    detail = "n=" + std::to_string(n) + " D=" + std::to_string(D) + " est=" +
                             std::to_string(est) + " bound=" + std::to_string(floor_bound);
                    return false;
                }
            }
        }
    }
    return true;
}

bool criterion6(std::string& detail) {
    for (const Pmf& p : {Pmf({0.5, 0.5}), Pmf({0.7, 0.3})}) {
        for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{4}}) {
            for (double D : {0.0, 0.25, 0.5}) {
                OracleResult o = oracle_best_strategy(p, ham2(), D, n);
                Strategy s = build_strategy(n, p, ham2(), D);
                double built = exact_expected_guesses(p, s, ham2(), D).mean_guesses;
                if (o.report.mean_guesses > built + 1e-9) {
                    detail = "oracle above constructed at n=" + std::to_string(n);
                    return false;
                }
                if (!o.report.exact || o.report.mean_guesses < 1.0) {
                    detail = "oracle report malformed";
                    return false;
                }
                double bound = best_converse(p, D, static_cast<long>(n));
                if (o.report.exponent_estimate < bound - 1e-12) {
                    detail = "oracle below converse at n=" + std::to_string(n) +
                             " D=" + std::to_string(D);
                    return false;
                }
            }
        }
    }
    return true;
}

bool criterion7(std::string& detail) {
    JointPmf diag(2, 2, {0.5, 0.0, 0.0, 0.5});
    for (double D : {0.0, 0.25}) {
        double v = deception_exponent_si(diag, ham2(), D).value;
        if (std::abs(v) > 1e-6) {
            detail = "diagonal D=" + std::to_string(D);
            return false;
        }
    }

    JointPmf prod(2, 2, {0.12, 0.18, 0.28, 0.42});  // X=(0.3,0.7) x Z=(0.4,0.6)
    for (double D : {0.0, 0.05, 0.1, 0.2, 0.3}) {
        double si = deception_exponent_si(prod, ham2(), D).value;
        double marg = deception_exponent(prod.x_marginal(), ham2(), D).value;
        if (std::abs(si - marg) > 1e-3) {
            detail = "independent D=" + std::to_string(D);
            return false;
        }
    }

    JointPmf bsc(2, 2, {0.45, 0.05, 0.05, 0.45});
    double ez = deception_exponent_si(bsc, ham2(), 0.0).value;
    ExponentOptions fine;
    fine.grid_resolution = 0.002;
    double ez_fine = deception_exponent_si(bsc, ham2(), 0.0, fine).value;
    if (std::abs(ez - ez_fine) > 1e-3) {
        detail = "coarse/fine mismatch " + std::to_string(ez) + " vs " + std::to_string(ez_fine);
        return false;
    }
    double e0 = deception_exponent(bsc.x_marginal(), ham2(), 0.0).value;
    if (!(ez_fine <= e0 - 0.01)) {
        detail = "side information not strictly helpful";
        return false;
    }
    return true;
}

bool criterion8(std::string& detail) {
    for (std::size_t n : {std::size_t{4}, std::size_t{6}, std::size_t{8}, std::size_t{10}}) {
        for (double D : {0.0, 0.25}) {
            for (const auto& t : enumerate_types(n, 2)) {
                CoveringSet c = build_covering(t, ham2(), D);
                if (!c.verified) {
                    detail = "unverified covering at n=" + std::to_string(n);
                    return false;
                }
            }
        }
    }
    CoveringSet c = build_covering(TypeComposition(4, {2, 2}), ham2(), 0.25);
    if (c.guesses.size() > 3) {
        detail = "|B|=" + std::to_string(c.guesses.size());
        return false;
    }
    return true;
}

bool criterion9(std::string& detail) {
    const std::string spec =
        R"({"source": {"pmf": [0.5, 0.5]}, "D": 0.0, "n": 8, "mode": "mc",)"
        R"( "trials": 20000, "seed": 31337})";
    if (run_command(spec, "attack", "") != run_command(spec, "attack", "")) {
        detail = "attack reports differ across runs";
        return false;
    }
    std::string sweep_over = R"({"grid": [0.0, 0.1, 0.2, 0.3]})";
    if (run_command(spec, "sweep", sweep_over) != run_command(spec, "sweep", sweep_over)) {
        detail = "sweep CSVs differ across runs";
        return false;
    }

#ifdef AUTHGUESS_CLI_PATH
    std::string dir = "acceptance_tmp";
    std::string spec_path = dir + "/spec.json";
    std::system(("mkdir -p " + dir).c_str());
    {
        std::ofstream out(spec_path);
        out << spec;
    }
    auto run_cli = [&](const std::string& out_path) {
        std::string cmd = std::string(AUTHGUESS_CLI_PATH) + " attack --spec " + spec_path +
                          " --out " + out_path;
        return std::system(cmd.c_str()) == 0;
    };
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    if (!run_cli(dir + "/a.json") || !run_cli(dir + "/b.json")) {
        detail = "CLI invocation failed";
        return false;
    }
    std::string a = slurp(dir + "/a.json");
    std::string b = slurp(dir + "/b.json");
    if (a.empty() || a != b) {
        detail = "CLI outputs differ across runs";
        return false;
    }
#endif
    return true;
}

}  // namespace

int main() {
    run(1, "closed-form binary Hamming rate-distortion", criterion1);
    run(2, "Renyi-1/2 identity at D=0", criterion2);
    run(3, "binary-uniform exponent closed form", criterion3);
    run(4, "finite-n achievability bound", criterion4);
    run(5, "finite-n converse holds for every strategy", criterion5);
    run(6, "oracle dominance on micro instances", criterion6);
    run(7, "side-information exponent sanity", criterion7);
    run(8, "covering verification", criterion8);
    run(9, "seeded reproducibility", criterion9);

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
