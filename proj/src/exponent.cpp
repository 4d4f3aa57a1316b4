#include "authguess/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

#include "authguess/errors.hpp"

namespace authguess {

namespace {

// Iterate all compositions of m into `parts` non-negative integers, in
// lexicographic order. The callback receives the counts vector.
template <typename F>
void for_each_composition(std::size_t m, std::size_t parts, F&& f) {
    std::vector<std::size_t> c(parts, 0);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t remaining) -> void {
        if (pos + 1 == parts) {
            c[pos] = remaining;
            f(c);
            return;
        }
        for (std::size_t v = 0; v <= remaining; ++v) {
            c[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    rec(rec, 0, m);
}

struct Candidate {
    std::vector<double> q;  // over the support cells only
    double objective;
};

// Keeps the k best candidates, objective descending, lexicographic q as the
// deterministic tie-break.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    void offer(const std::vector<double>& q, double obj) {
        if (items_.size() == k_ && obj <= items_.back().objective) return;
        auto pos = std::find_if(items_.begin(), items_.end(), [&](const Candidate& c) {
            return obj > c.objective || (obj == c.objective && q < c.q);
        });
        items_.insert(pos, Candidate{q, obj});
        if (items_.size() > k_) items_.pop_back();
    }

    const std::vector<Candidate>& items() const { return items_; }

private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

// Nelder-Mead on the probability simplex over `dim` cells. Proposals are
// projected back by clamping at zero and renormalizing.
std::pair<std::vector<double>, double> refine_on_simplex(
    std::vector<double> start, const std::function<double(const std::vector<double>&)>& f,
    double tol) {
    const std::size_t dim = start.size();
    auto project = [&](std::vector<double> v) {
        double s = 0.0;
        for (double& x : v) {
            if (x < 0.0) x = 0.0;
            s += x;
        }
        if (s <= 0.0) {
            std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(dim));
        } else {
            for (double& x : v) x /= s;
        }
        return v;
    };

    std::vector<std::vector<double>> verts;
    std::vector<double> fv;
    verts.push_back(project(start));
    for (std::size_t i = 0; i < dim; ++i) {
        auto v = verts[0];
        v[i] += 0.05;
        verts.push_back(project(std::move(v)));
    }
    for (const auto& v : verts) fv.push_back(f(v));

    const int max_iter = 400 * static_cast<int>(dim);
    for (int it = 0; it < max_iter; ++it) {
        // sort ascending (minimizing -objective means caller negates; here we
        // maximize directly, so sort descending)
        std::vector<std::size_t> order(verts.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
        std::vector<std::vector<double>> sv;
        std::vector<double> sf;
        for (std::size_t i : order) {
            sv.push_back(verts[i]);
            sf.push_back(fv[i]);
        }
        verts = std::move(sv);
        fv = std::move(sf);

        double diam = 0.0;
        for (std::size_t i = 1; i < verts.size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                diam = std::max(diam, std::abs(verts[i][j] - verts[0][j]));
            }
        }
        if (diam < tol) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += verts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(verts.size() - 1);

        const auto& worst = verts.back();
        auto propose = [&](double alpha) {
            std::vector<double> v(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                v[j] = centroid[j] + alpha * (centroid[j] - worst[j]);
            }
            return project(std::move(v));
        };

        auto reflected = propose(1.0);
        double fr = f(reflected);
        if (fr > fv[0]) {
            auto expanded = propose(2.0);
            double fe = f(expanded);
            if (fe > fr) {
                verts.back() = std::move(expanded);
                fv.back() = fe;
            } else {
                verts.back() = std::move(reflected);
                fv.back() = fr;
            }
        } else if (fr > fv[fv.size() - 2]) {
            verts.back() = std::move(reflected);
            fv.back() = fr;
        } else {
            auto contracted = propose(-0.5);
            double fc = f(contracted);
            if (fc > fv.back()) {
                verts.back() = std::move(contracted);
                fv.back() = fc;
            } else {
                for (std::size_t i = 1; i < verts.size(); ++i) {
                    for (std::size_t j = 0; j < dim; ++j) {
                        verts[i][j] = 0.5 * (verts[i][j] + verts[0][j]);
                    }
                    verts[i] = project(std::move(verts[i]));
                    fv[i] = f(verts[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < fv.size(); ++i) {
        if (fv[i] > fv[best]) best = i;
    }
    return {verts[best], fv[best]};
}

// Shared grid + refine driver. `support` lists the free cells of the full
// vector of length `full_size`; `objective` takes the full vector.
ExponentResult maximize_over_simplex(
    const std::vector<double>& p_full, const std::vector<std::size_t>& support,
    const std::function<double(const std::vector<double>&)>& objective,
    const ExponentOptions& opts) {
    const std::size_t dim = support.size();
    if (dim > opts.alphabet_limit) {
        throw SizeLimitError("deception_exponent: support size " + std::to_string(dim) +
                             " exceeds the grid search limit of " +
                             std::to_string(opts.alphabet_limit));
    }
    const std::size_t m =
        static_cast<std::size_t>(std::max(1.0, std::llround(1.0 / opts.grid_resolution) * 1.0));

    auto expand = [&](const std::vector<double>& qs) {
        std::vector<double> full(p_full.size(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) full[support[i]] = qs[i];
        return full;
    };

    TopK top(static_cast<std::size_t>(opts.multistart));
    std::vector<double> qs(dim);
    for_each_composition(m, dim, [&](const std::vector<std::size_t>& counts) {
        for (std::size_t i = 0; i < dim; ++i) {
            qs[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
        }
        top.offer(qs, objective(expand(qs)));
    });
    // Q = P is always feasible; make sure it is among the candidates.
    {
        std::vector<double> ps(dim);
        for (std::size_t i = 0; i < dim; ++i) ps[i] = p_full[support[i]];
        top.offer(ps, objective(expand(ps)));
    }

    ExponentResult res;
    res.grid_resolution = 1.0 / static_cast<double>(m);
    for (const auto& c : top.items()) {
        res.objective_trace.emplace_back(expand(c.q), c.objective);
    }

    std::vector<double> best_q = top.items().front().q;
    double best_obj = top.items().front().objective;
    for (const auto& c : top.items()) {
        auto [q_ref, obj_ref] =
            refine_on_simplex(c.q, [&](const std::vector<double>& v) { return objective(expand(v)); },
                              opts.refine_tol);
        if (obj_ref > best_obj || (obj_ref == best_obj && q_ref < best_q)) {
            best_obj = obj_ref;
            best_q = q_ref;
            res.refined = true;
        }
    }

    res.value = std::max(best_obj, 0.0);
    res.argmax_q = expand(best_q);
    return res;
}

}  // namespace

ExponentResult deception_exponent(const Pmf& p, const DistortionSpec& d, double D,
                                  const ExponentOptions& opts) {
    if (p.size() != d.x_size()) {
        throw InvalidInputError("deception_exponent: alphabet mismatch");
    }
    if (D < 0.0) throw InvalidInputError("deception_exponent: D must be >= 0");

    auto support = p.support();
    auto objective = [&](const std::vector<double>& q_full) {
        double kl = 0.0;
        for (std::size_t i : support) {
            if (q_full[i] > 0.0) kl += q_full[i] * std::log(q_full[i] / p[i]);
        }
        double rate = rate_distortion_value(Pmf(q_full), d, D, opts.rd);
        return rate - std::max(kl, 0.0);
    };
    return maximize_over_simplex(p.probs(), support, objective, opts);
}

ExponentResult deception_exponent_si(const JointPmf& p, const DistortionSpec& d, double D,
                                     const ExponentOptions& opts) {
    if (p.x_size() != d.x_size()) {
        throw InvalidInputError("deception_exponent_si: alphabet mismatch");
    }
    if (D < 0.0) throw InvalidInputError("deception_exponent_si: D must be >= 0");

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < p.probs().size(); ++i) {
        if (p.probs()[i] > 0.0) support.push_back(i);
    }

    const bool fast_zero = D == 0.0 && d.has_unique_zero_structure() && d.y_size() <= 64;
    auto objective = [&](const std::vector<double>& q_full) {
        double kl = 0.0;
        for (std::size_t i : support) {
            if (q_full[i] > 0.0) kl += q_full[i] * std::log(q_full[i] / p.probs()[i]);
        }
        kl = std::max(kl, 0.0);
        if (fast_zero) {
            // sum_z q_Z(z) H(Y|z) over zero-distortion images, allocation-free.
            double rate = 0.0;
            for (std::size_t z = 0; z < p.z_size(); ++z) {
                double w = 0.0;
                for (std::size_t x = 0; x < p.x_size(); ++x) w += q_full[x * p.z_size() + z];
                if (w <= 0.0) continue;
                double acc[64];
                std::fill(acc, acc + d.y_size(), 0.0);
                for (std::size_t x = 0; x < p.x_size(); ++x) {
                    acc[d.zero_images(x).front()] += q_full[x * p.z_size() + z];
                }
                double h = 0.0;
                for (std::size_t y = 0; y < d.y_size(); ++y) {
                    if (acc[y] > 0.0) {
                        double c = acc[y] / w;
                        h -= c * std::log(c);
                    }
                }
                rate += w * h;
            }
            return rate - kl;
        }
        JointPmf q(p.x_size(), p.z_size(), q_full);
        return conditional_rate_distortion_value(q, d, D, opts.rd) - kl;
    };
    return maximize_over_simplex(p.probs(), support, objective, opts);
}

double riemann_zeta(double s) {
    if (!(s > 1.0)) throw InvalidInputError("riemann_zeta: need s > 1");
    const double n = 100000.0;
    double sum = 0.0;
    for (double j = 1.0; j <= n; j += 1.0) sum += std::pow(j, -s);
    // Euler-Maclaurin tail
    sum += std::pow(n, 1.0 - s) / (s - 1.0);
    sum += 0.5 * std::pow(n, -s);
    sum += s * std::pow(n, -s - 1.0) / 12.0;
    sum -= s * (s + 1.0) * (s + 2.0) * std::pow(n, -s - 3.0) / 720.0;
    return sum;
}

namespace {

double log_zeta_normalizer(double eps) {
    static std::map<double, double> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(eps);
    if (it != cache.end()) return it->second;
    double v = -std::log(riemann_zeta(1.0 + eps));  // ln C(eps)
    cache.emplace(eps, v);
    return v;
}

}  // namespace

double converse_lower_bound(const Pmf& q, const Pmf& p, const DistortionSpec& d, double D,
                            double eps, long n, const RdOptions& rd_opts) {
    if (eps <= 0.0) throw InvalidInputError("converse_lower_bound: eps must be > 0");
    if (n < 1) throw InvalidInputError("converse_lower_bound: n must be >= 1");
    double kl = relative_entropy(q, p);
    if (std::isinf(kl)) return -kInfinity;
    double rate = rate_distortion(q, d, D, rd_opts).rate;
    double ln_c = log_zeta_normalizer(eps);
    return -kl + rate / (1.0 + eps) -
           (std::log(2.0) - ln_c) / (static_cast<double>(n) * (1.0 + eps));
}

}  // namespace authguess
