#pragma once

// Numerical rate-distortion function R(D,Q) and the conditional variant
// R_{X|Z}(D,Q), via Blahut-Arimoto in Lagrangian form with slope bisection.
// Rates are in nats.

#include <cstddef>
#include <vector>

#include "authguess/prob.hpp"

namespace authguess {

struct RdOptions {
    double d_tol = 1e-9;          // bisection target on achieved distortion
    double ba_gap_tol = 1e-10;    // duality-gap bound per Blahut-Arimoto run
    int max_iterations = 10000;   // per Blahut-Arimoto run
    // When set, the Lagrangian objective of every BA iteration is appended
    // (used by tests to assert per-iteration monotonicity).
    std::vector<double>* objective_trace = nullptr;
};

struct RdResult {
    double rate = 0.0;        // nats
    double target_d = 0.0;
    double achieved_d = 0.0;
    // Test channel P(y|x). For the unconditional solver: rows indexed by x.
    // For the conditional solver: rows indexed by z * x_size + x.
    std::vector<std::vector<double>> test_channel;
    double slope = 0.0;       // Lagrange multiplier (dR/dD = -slope)
    int iterations = 0;
    bool converged = false;
};

// Distortion at which the rate-distortion curve hits zero:
// D_max(q) = min_y E_q[d(X,y)].
double distortion_at_zero_rate(const Pmf& q, const DistortionSpec& d);

// R(D,q) with the minimizing test channel. D = 0 is handled analytically on
// the zero-distortion reproduction structure; D >= D_max(q) returns rate 0
// exactly. Non-convergence is reported via converged=false.
RdResult rate_distortion(const Pmf& q, const DistortionSpec& d, double D,
                         const RdOptions& opts = {});

// R_{X|Z}(D,q) = min over distortion allocations sum_z q_Z(z) R(D_z, q_{X|z})
// subject to sum_z q_Z(z) D_z <= D, solved with a single common slope.
RdResult conditional_rate_distortion(const JointPmf& q, const DistortionSpec& d, double D,
                                     const RdOptions& opts = {});

// One RdResult per grid point; grid must be sorted ascending and >= 0.
std::vector<RdResult> rd_curve(const Pmf& q, const DistortionSpec& d,
                               const std::vector<double>& grid, const RdOptions& opts = {});

// Allocation-light variants returning only the rate, for hot loops in the
// exponent grid search. Same semantics as the full solvers.
double rate_distortion_value(const Pmf& q, const DistortionSpec& d, double D,
                             const RdOptions& opts = {});
double conditional_rate_distortion_value(const JointPmf& q, const DistortionSpec& d, double D,
                                         const RdOptions& opts = {});

namespace detail {

// One Blahut-Arimoto run at a fixed slope on a support-compacted source.
// gains(x,y) = exp(-slope * d(x,y)); a zero gain forbids the transition.
struct BaSolution {
    double lagrangian = 0.0;  // rate + slope * dist
    double rate = 0.0;
    double dist = 0.0;
    std::vector<double> channel;  // row-major x_size x y_size
    int iterations = 0;
    bool converged = false;
};

BaSolution ba_fixed_slope(const std::vector<double>& p, std::size_t y_size,
                          const std::vector<double>& dmat, double slope,
                          const RdOptions& opts);

}  // namespace detail

}  // namespace authguess
