#include "authguess/rd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "authguess/errors.hpp"

namespace authguess {

namespace detail {

BaSolution ba_fixed_slope(const std::vector<double>& p, std::size_t y_size,
                          const std::vector<double>& dmat, double slope,
                          const RdOptions& opts) {
    const std::size_t x_size = p.size();
    // gains(x,y) = exp(-slope * d); slope = +inf restricts to d == 0.
    std::vector<double> g(x_size * y_size);
    for (std::size_t x = 0; x < x_size; ++x) {
        for (std::size_t y = 0; y < y_size; ++y) {
            double d = dmat[x * y_size + y];
            g[x * y_size + y] =
                std::isinf(slope) ? (d == 0.0 ? 1.0 : 0.0) : std::exp(-slope * d);
        }
    }

    std::vector<double> q(y_size, 1.0 / static_cast<double>(y_size));
    std::vector<double> t(y_size);
    std::vector<double> zx(x_size);

    BaSolution sol;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        sol.iterations = it;
        double objective = 0.0;
        for (std::size_t x = 0; x < x_size; ++x) {
            double z = 0.0;
            for (std::size_t y = 0; y < y_size; ++y) z += q[y] * g[x * y_size + y];
            zx[x] = z;
            objective -= p[x] * std::log(z);
        }
        if (opts.objective_trace) opts.objective_trace->push_back(objective);

        std::fill(t.begin(), t.end(), 0.0);
        for (std::size_t x = 0; x < x_size; ++x) {
            double inv = p[x] / zx[x];
            for (std::size_t y = 0; y < y_size; ++y) {
                t[y] += inv * q[y] * g[x * y_size + y];
            }
        }
        // F(q) - F* <= max_y ln(t(y)/q(y)); Jensen over the BA update.
        double gap = 0.0;
        for (std::size_t y = 0; y < y_size; ++y) {
            if (q[y] > 0.0 && t[y] > 0.0) gap = std::max(gap, std::log(t[y] / q[y]));
        }
        q = t;
        if (gap < opts.ba_gap_tol) {
            sol.converged = true;
            break;
        }
    }

    // Final test channel, distortion, and exact mutual information.
    std::vector<double> channel(x_size * y_size, 0.0);
    std::vector<double> qout(y_size, 0.0);
    double dist = 0.0;
    for (std::size_t x = 0; x < x_size; ++x) {
        double z = 0.0;
        for (std::size_t y = 0; y < y_size; ++y) z += q[y] * g[x * y_size + y];
        for (std::size_t y = 0; y < y_size; ++y) {
            double w = q[y] * g[x * y_size + y] / z;
            channel[x * y_size + y] = w;
            qout[y] += p[x] * w;
            dist += p[x] * w * dmat[x * y_size + y];
        }
    }
    double mi = 0.0;
    for (std::size_t x = 0; x < x_size; ++x) {
        for (std::size_t y = 0; y < y_size; ++y) {
            double w = channel[x * y_size + y];
            if (w > 0.0 && p[x] > 0.0) mi += p[x] * w * std::log(w / qout[y]);
        }
    }
    sol.rate = std::max(mi, 0.0);
    sol.dist = dist;
    sol.lagrangian = std::isinf(slope) ? sol.rate : sol.rate + slope * dist;
    sol.channel = std::move(channel);
    return sol;
}

namespace {

// R(0,q) when every x has a unique zero-distortion y: the entropy of the
// induced reproduction distribution.
double zero_distortion_rate_unique(const double* q, std::size_t x_size,
                                   const DistortionSpec& d) {
    double acc[64];
    std::size_t y_size = d.y_size();
    std::fill(acc, acc + y_size, 0.0);
    for (std::size_t x = 0; x < x_size; ++x) {
        acc[d.zero_images(x).front()] += q[x];
    }
    double h = 0.0;
    for (std::size_t y = 0; y < y_size; ++y) {
        if (acc[y] > 0.0) h -= acc[y] * std::log(acc[y]);
    }
    return h;
}

struct CompactSource {
    std::vector<std::size_t> xs;  // original indices
    std::vector<double> p;
    std::vector<double> dmat;     // |xs| x y_size
};

CompactSource compact(const Pmf& q, const DistortionSpec& d) {
    CompactSource c;
    for (std::size_t x = 0; x < q.size(); ++x) {
        if (q[x] <= 0.0) continue;
        c.xs.push_back(x);
        c.p.push_back(q[x]);
        for (std::size_t y = 0; y < d.y_size(); ++y) c.dmat.push_back(d(x, y));
    }
    return c;
}

}  // namespace
}  // namespace detail

double distortion_at_zero_rate(const Pmf& q, const DistortionSpec& d) {
    if (q.size() != d.x_size()) {
        throw InvalidInputError("distortion_at_zero_rate: alphabet mismatch");
    }
    double best = kInfinity;
    for (std::size_t y = 0; y < d.y_size(); ++y) {
        double e = 0.0;
        for (std::size_t x = 0; x < q.size(); ++x) e += q[x] * d(x, y);
        best = std::min(best, e);
    }
    return best;
}

namespace {

using detail::BaSolution;

// Generic slope bisection over a monotone distortion-vs-slope map. eval(s)
// must return a solution whose dist is non-increasing in s.
RdResult bisect_slope(double D, double d_at_zero_rate,
                      const std::function<BaSolution(double)>& eval,
                      const std::function<std::vector<std::vector<double>>(
                          const BaSolution*, const BaSolution*, double)>& make_channel,
                      const RdOptions& opts) {
    RdResult r;
    r.target_d = D;

    // Virtual slope-0 endpoint: rate 0 at D_max.
    BaSolution lo_sol;
    lo_sol.rate = 0.0;
    lo_sol.dist = d_at_zero_rate;
    lo_sol.converged = true;
    bool lo_is_virtual = true;
    double lo = 0.0;

    double hi = 1.0;
    BaSolution hi_sol = eval(hi);
    int iterations = hi_sol.iterations;
    bool all_converged = hi_sol.converged;
    while (hi_sol.dist > D && hi < 1e18) {
        lo = hi;
        lo_sol = hi_sol;
        lo_is_virtual = false;
        hi *= 4.0;
        hi_sol = eval(hi);
        iterations += hi_sol.iterations;
        all_converged = all_converged && hi_sol.converged;
    }

    while (D - hi_sol.dist > opts.d_tol && hi - lo > 1e-13 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        BaSolution mid_sol = eval(mid);
        iterations += mid_sol.iterations;
        all_converged = all_converged && mid_sol.converged;
        if (mid_sol.dist > D) {
            lo = mid;
            lo_sol = std::move(mid_sol);
            lo_is_virtual = false;
        } else {
            hi = mid;
            hi_sol = std::move(mid_sol);
        }
    }

    r.iterations = iterations;
    r.converged = all_converged && hi_sol.dist <= D + opts.d_tol;
    if (D - hi_sol.dist <= opts.d_tol) {
        r.rate = hi_sol.rate;
        r.achieved_d = hi_sol.dist;
        r.slope = hi;
        r.test_channel = make_channel(&hi_sol, nullptr, 1.0);
    } else {
        // The slope map jumped across D (linear segment of the R(D) curve);
        // timeshare the two endpoint solutions.
        double lam = (D - hi_sol.dist) / (lo_sol.dist - hi_sol.dist);
        r.rate = lam * lo_sol.rate + (1.0 - lam) * hi_sol.rate;
        r.achieved_d = D;
        r.slope = hi;
        r.test_channel = make_channel(lo_is_virtual ? nullptr : &lo_sol, &hi_sol, lam);
    }
    r.rate = std::max(r.rate, 0.0);
    return r;
}

std::vector<std::vector<double>> default_channel_rows(const Pmf& q, const DistortionSpec& d) {
    std::vector<std::vector<double>> rows(q.size(), std::vector<double>(d.y_size(), 0.0));
    for (std::size_t x = 0; x < q.size(); ++x) {
        rows[x][d.zero_images(x).front()] = 1.0;
    }
    return rows;
}

}  // namespace

RdResult rate_distortion(const Pmf& q, const DistortionSpec& d, double D,
                         const RdOptions& opts) {
    if (q.size() != d.x_size()) {
        throw InvalidInputError("rate_distortion: alphabet mismatch");
    }
    if (D < 0.0) throw InvalidInputError("rate_distortion: D must be >= 0");

    auto c = detail::compact(q, d);
    RdResult r;
    r.target_d = D;
    r.test_channel = default_channel_rows(q, d);

    // Zero-rate regime: a constant reproduction meets the constraint.
    double e_best = kInfinity;
    std::size_t y_star = 0;
    for (std::size_t y = 0; y < d.y_size(); ++y) {
        double e = 0.0;
        for (std::size_t i = 0; i < c.p.size(); ++i) e += c.p[i] * c.dmat[i * d.y_size() + y];
        if (e < e_best) {
            e_best = e;
            y_star = y;
        }
    }
    if (D >= e_best - 1e-15) {
        r.rate = 0.0;
        r.achieved_d = std::min(e_best, D);
        r.slope = 0.0;
        r.converged = true;
        for (std::size_t i = 0; i < c.xs.size(); ++i) {
            auto& row = r.test_channel[c.xs[i]];
            std::fill(row.begin(), row.end(), 0.0);
            row[y_star] = 1.0;
        }
        return r;
    }

    if (D == 0.0) {
        r.achieved_d = 0.0;
        r.slope = kInfinity;
        bool unique = true;
        for (std::size_t x : c.xs) unique = unique && d.zero_images(x).size() == 1;
        if (unique) {
            r.rate = detail::zero_distortion_rate_unique(c.p.data(), c.p.size(), d);
            r.converged = true;
            for (std::size_t i = 0; i < c.xs.size(); ++i) {
                auto& row = r.test_channel[c.xs[i]];
                std::fill(row.begin(), row.end(), 0.0);
                row[d.zero_images(c.xs[i]).front()] = 1.0;
            }
        } else {
            auto sol = detail::ba_fixed_slope(c.p, d.y_size(), c.dmat, kInfinity, opts);
            r.rate = sol.rate;
            r.iterations = sol.iterations;
            r.converged = sol.converged;
            for (std::size_t i = 0; i < c.xs.size(); ++i) {
                for (std::size_t y = 0; y < d.y_size(); ++y) {
                    r.test_channel[c.xs[i]][y] = sol.channel[i * d.y_size() + y];
                }
            }
        }
        return r;
    }

    auto eval = [&](double s) { return detail::ba_fixed_slope(c.p, d.y_size(), c.dmat, s, opts); };
    auto make_channel = [&](const BaSolution* a, const BaSolution* b,
                            double lam) -> std::vector<std::vector<double>> {
        auto rows = default_channel_rows(q, d);
        for (std::size_t i = 0; i < c.xs.size(); ++i) {
            auto& row = rows[c.xs[i]];
            for (std::size_t y = 0; y < d.y_size(); ++y) {
                double wa = a ? a->channel[i * d.y_size() + y] : (y == y_star ? 1.0 : 0.0);
                double wb = b ? b->channel[i * d.y_size() + y] : wa;
                row[y] = b ? lam * wa + (1.0 - lam) * wb : wa;
            }
        }
        return rows;
    };

    return bisect_slope(D, e_best, eval, make_channel, opts);
}

RdResult conditional_rate_distortion(const JointPmf& q, const DistortionSpec& d, double D,
                                     const RdOptions& opts) {
    if (q.x_size() != d.x_size()) {
        throw InvalidInputError("conditional_rate_distortion: alphabet mismatch");
    }
    if (D < 0.0) throw InvalidInputError("conditional_rate_distortion: D must be >= 0");

    const std::size_t xs = q.x_size();
    const std::size_t zs = q.z_size();

    // Per-z compacted conditional sources, skipping q_Z(z) = 0.
    struct PerZ {
        std::size_t z;
        double weight;
        detail::CompactSource src;
        double d_zero_rate;  // min_y E[d | z]
    };
    std::vector<PerZ> conds;
    for (std::size_t z = 0; z < zs; ++z) {
        double w = 0.0;
        for (std::size_t x = 0; x < xs; ++x) w += q(x, z);
        if (w <= 0.0) continue;
        std::vector<double> cond(xs);
        for (std::size_t x = 0; x < xs; ++x) cond[x] = q(x, z) / w;
        double s = 0.0;
        for (double v : cond) s += v;
        for (double& v : cond) v /= s;
        PerZ pzrec{z, w, detail::compact(Pmf(cond), d), 0.0};
        double best = kInfinity;
        for (std::size_t y = 0; y < d.y_size(); ++y) {
            double e = 0.0;
            for (std::size_t i = 0; i < pzrec.src.p.size(); ++i)
                e += pzrec.src.p[i] * pzrec.src.dmat[i * d.y_size() + y];
            best = std::min(best, e);
        }
        pzrec.d_zero_rate = best;
        conds.push_back(std::move(pzrec));
    }

    // Channel rows indexed z * x_size + x, defaulting to zero-image rows.
    auto default_rows = [&]() {
        std::vector<std::vector<double>> rows(zs * xs, std::vector<double>(d.y_size(), 0.0));
        for (std::size_t z = 0; z < zs; ++z)
            for (std::size_t x = 0; x < xs; ++x)
                rows[z * xs + x][d.zero_images(x).front()] = 1.0;
        return rows;
    };

    RdResult r;
    r.target_d = D;
    r.test_channel = default_rows();

    double d_zero_total = 0.0;
    for (const auto& c : conds) d_zero_total += c.weight * c.d_zero_rate;
    if (D >= d_zero_total - 1e-15) {
        r.rate = 0.0;
        r.achieved_d = std::min(d_zero_total, D);
        r.slope = 0.0;
        r.converged = true;
        for (const auto& c : conds) {
            double best = kInfinity;
            std::size_t y_star = 0;
            for (std::size_t y = 0; y < d.y_size(); ++y) {
                double e = 0.0;
                for (std::size_t i = 0; i < c.src.p.size(); ++i)
                    e += c.src.p[i] * c.src.dmat[i * d.y_size() + y];
                if (e < best) {
                    best = e;
                    y_star = y;
                }
            }
            for (std::size_t i = 0; i < c.src.xs.size(); ++i) {
                auto& row = r.test_channel[c.z * xs + c.src.xs[i]];
                std::fill(row.begin(), row.end(), 0.0);
                row[y_star] = 1.0;
            }
        }
        return r;
    }

    auto solve_all = [&](double s) {
        BaSolution total;
        total.converged = true;
        std::vector<double> chan;
        chan.reserve(conds.size());
        std::size_t off = 0;
        for (const auto& c : conds) {
            auto sol = detail::ba_fixed_slope(c.src.p, d.y_size(), c.src.dmat, s, opts);
            total.rate += c.weight * sol.rate;
            total.dist += c.weight * sol.dist;
            total.iterations += sol.iterations;
            total.converged = total.converged && sol.converged;
            total.channel.resize(off + sol.channel.size());
            std::copy(sol.channel.begin(), sol.channel.end(), total.channel.begin() + off);
            off += sol.channel.size();
        }
        total.lagrangian = total.rate + (std::isinf(s) ? 0.0 : s * total.dist);
        return total;
    };

    if (D == 0.0) {
        auto sol = solve_all(kInfinity);
        r.rate = sol.rate;
        r.achieved_d = 0.0;
        r.slope = kInfinity;
        r.iterations = sol.iterations;
        r.converged = sol.converged;
        std::size_t off = 0;
        for (const auto& c : conds) {
            for (std::size_t i = 0; i < c.src.xs.size(); ++i) {
                for (std::size_t y = 0; y < d.y_size(); ++y) {
                    r.test_channel[c.z * xs + c.src.xs[i]][y] =
                        sol.channel[off + i * d.y_size() + y];
                }
            }
            off += c.src.p.size() * d.y_size();
        }
        return r;
    }

    // Per-z constant best-reproduction rows, the slope-0 endpoint channel.
    std::vector<std::size_t> y_star_for_z(zs, 0);
    for (const auto& c : conds) {
        double best = kInfinity;
        for (std::size_t y = 0; y < d.y_size(); ++y) {
            double e = 0.0;
            for (std::size_t i = 0; i < c.src.p.size(); ++i)
                e += c.src.p[i] * c.src.dmat[i * d.y_size() + y];
            if (e < best) {
                best = e;
                y_star_for_z[c.z] = y;
            }
        }
    }

    auto make_channel = [&](const BaSolution* a, const BaSolution* b,
                            double lam) -> std::vector<std::vector<double>> {
        auto rows = default_rows();
        std::size_t off = 0;
        for (const auto& c : conds) {
            for (std::size_t i = 0; i < c.src.xs.size(); ++i) {
                auto& row = rows[c.z * xs + c.src.xs[i]];
                for (std::size_t y = 0; y < d.y_size(); ++y) {
                    std::size_t k = off + i * d.y_size() + y;
                    double wa = a ? a->channel[k] : (y == y_star_for_z[c.z] ? 1.0 : 0.0);
                    double wb = b ? b->channel[k] : wa;
                    row[y] = b ? lam * wa + (1.0 - lam) * wb : wa;
                }
            }
            off += c.src.p.size() * d.y_size();
        }
        return rows;
    };

    auto eval = [&](double s) { return solve_all(s); };
    return bisect_slope(D, d_zero_total, eval, make_channel, opts);
}

std::vector<RdResult> rd_curve(const Pmf& q, const DistortionSpec& d,
                               const std::vector<double>& grid, const RdOptions& opts) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || (i > 0 && grid[i] < grid[i - 1])) {
            throw InvalidInputError("rd_curve: grid must be sorted ascending and >= 0");
        }
    }
    std::vector<RdResult> out;
    out.reserve(grid.size());
    for (double D : grid) out.push_back(rate_distortion(q, d, D, opts));
    return out;
}

double rate_distortion_value(const Pmf& q, const DistortionSpec& d, double D,
                             const RdOptions& opts) {
    if (D == 0.0 && d.has_unique_zero_structure() && d.y_size() <= 64) {
        return detail::zero_distortion_rate_unique(q.probs().data(), q.size(), d);
    }
    return rate_distortion(q, d, D, opts).rate;
}

double conditional_rate_distortion_value(const JointPmf& q, const DistortionSpec& d, double D,
                                         const RdOptions& opts) {
    if (D == 0.0 && d.has_unique_zero_structure() && d.y_size() <= 64) {
        // sum_z q_Z(z) H(Y | z) on the zero-distortion images.
        double rate = 0.0;
        for (std::size_t z = 0; z < q.z_size(); ++z) {
            double w = 0.0;
            for (std::size_t x = 0; x < q.x_size(); ++x) w += q(x, z);
            if (w <= 0.0) continue;
            double acc[64];
            std::fill(acc, acc + d.y_size(), 0.0);
            for (std::size_t x = 0; x < q.x_size(); ++x) {
                acc[d.zero_images(x).front()] += q(x, z) / w;
            }
            double h = 0.0;
            for (std::size_t y = 0; y < d.y_size(); ++y) {
                if (acc[y] > 0.0) h -= acc[y] * std::log(acc[y]);
            }
            rate += w * h;
        }
        return rate;
    }
    return conditional_rate_distortion(q, d, D, opts).rate;
}

}  // namespace authguess
