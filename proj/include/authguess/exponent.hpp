#pragma once

// Deception exponent E(D) = max_Q [R(D,Q) - D(Q||P)] and the side-information
// variant E_Z(D), computed by dense simplex grid search plus derivative-free
// local refinement. Also the finite-n converse lower bound built from the
// integer entropy code with rho_j ~ C(eps) / j^(1+eps).

#include <cstddef>
#include <utility>
#include <vector>

#include "authguess/prob.hpp"
#include "authguess/rd.hpp"

namespace authguess {

struct ExponentOptions {
    double grid_resolution = 0.01;
    std::size_t alphabet_limit = 6;  // max number of grid dimensions (support cells)
    int multistart = 5;              // grid candidates fed to local refinement
    double refine_tol = 1e-6;        // simplex termination step
    RdOptions rd;
};

struct ExponentResult {
    double value = 0.0;               // nats
    std::vector<double> argmax_q;     // full alphabet; row-major x*z for joint
    // Best grid candidates and their objectives, best first.
    std::vector<std::pair<std::vector<double>, double>> objective_trace;
    double grid_resolution = 0.0;
    bool refined = false;
};

ExponentResult deception_exponent(const Pmf& p, const DistortionSpec& d, double D,
                                  const ExponentOptions& opts = {});

ExponentResult deception_exponent_si(const JointPmf& p, const DistortionSpec& d, double D,
                                     const ExponentOptions& opts = {});

// Finite-n lower bound on (1/n) ln E_P[G] valid for every strategy:
//   -D(q||p) + R(D,q)/(1+eps) - (ln 2 - ln C(eps)) / (n (1+eps)),
// with C(eps) = 1 / zeta(1+eps).
double converse_lower_bound(const Pmf& q, const Pmf& p, const DistortionSpec& d, double D,
                            double eps, long n, const RdOptions& rd_opts = {});

// Riemann zeta for s > 1, by direct summation with an Euler-Maclaurin tail
// bound. Exposed for tests of the converse normalizer.
double riemann_zeta(double s);

}  // namespace authguess
