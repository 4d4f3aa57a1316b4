#include "authguess/side_info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "authguess/errors.hpp"
#include "authguess/exponent.hpp"

namespace authguess {

namespace {

std::mutex g_cache_mutex;

std::uint64_t ipow_checked(std::size_t base, std::size_t exp, std::size_t limit) {
    std::uint64_t v = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (v > limit / std::max<std::size_t>(base, 1)) return limit + 1;
        v *= base;
    }
    return v;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Groups of equal symbols in a sorted z-sequence: (symbol, start, length).
struct ZGroup {
    std::uint8_t symbol;
    std::size_t start;
    std::size_t length;
};

std::vector<ZGroup> z_groups(const Sequence& z_sorted) {
    std::vector<ZGroup> groups;
    std::size_t i = 0;
    while (i < z_sorted.size()) {
        std::size_t j = i;
        while (j < z_sorted.size() && z_sorted[j] == z_sorted[i]) ++j;
        groups.push_back({z_sorted[i], i, j - i});
        i = j;
    }
    return groups;
}

// All compositions of m over the given symbol set.
std::vector<std::vector<std::size_t>> compositions_over(std::size_t m,
                                                        std::size_t parts) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> c(parts, 0);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t remaining) -> void {
        if (pos + 1 == parts) {
            c[pos] = remaining;
            out.push_back(c);
            return;
        }
        for (std::size_t v = 0; v <= remaining; ++v) {
            c[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    rec(rec, 0, m);
    return out;
}

// All arrangements of a group-local composition, as symbol sequences of the
// group length over the listed x symbols.
std::vector<Sequence> group_arrangements(const std::vector<std::size_t>& comp,
                                         const std::vector<std::uint8_t>& symbols) {
    Sequence base;
    for (std::size_t i = 0; i < comp.size(); ++i) {
        base.insert(base.end(), comp[i], symbols[i]);
    }
    std::sort(base.begin(), base.end());
    std::vector<Sequence> out;
    do {
        out.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    return out;
}

}  // namespace

SiStrategy::SiStrategy(std::size_t n, JointPmf p, DistortionSpec d, double D,
                       GuessingOptions opts)
    : n_(n),
      p_(std::move(p)),
      d_(std::move(d)),
      D_(D),
      opts_(std::move(opts)),
      independent_(p_.factorizes()) {
    if (p_.x_size() != d_.x_size()) {
        throw InvalidInputError("SiStrategy: alphabet mismatch");
    }
    if (D_ < 0.0) throw InvalidInputError("SiStrategy: D must be >= 0");
}

Strategy SiStrategy::build_for_sorted(const Sequence& z_sorted) const {
    // Independent side information carries no information about x; the
    // per-z strategy collapses to the marginal construction.
    if (independent_) {
        return build_strategy(n_, p_.x_marginal(), d_, D_, opts_);
    }

    auto groups = z_groups(z_sorted);

    // Reachable x symbols per group; a z symbol with no support falls back to
    // the full alphabet so a strategy exists for every queried z.
    std::vector<std::vector<std::uint8_t>> reach(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t x = 0; x < p_.x_size(); ++x) {
            if (p_(x, groups[g].symbol) > 0.0) {
                reach[g].push_back(static_cast<std::uint8_t>(x));
            }
        }
        if (reach[g].empty()) {
            for (std::size_t x = 0; x < p_.x_size(); ++x) {
                reach[g].push_back(static_cast<std::uint8_t>(x));
            }
        }
    }

    // Enumerate conditional types: one composition per group.
    std::vector<std::vector<std::vector<std::size_t>>> per_group;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        per_group.push_back(compositions_over(groups[g].length, reach[g].size()));
    }

    std::vector<Sequence> pool;
    if (ipow_checked(d_.y_size(), n_, opts_.candidate_pool_limit) <=
        opts_.candidate_pool_limit) {
        pool = enumerate_sequences(n_, d_.y_size(), opts_.candidate_pool_limit);
    } else {
        throw SizeLimitError("SiStrategy: candidate pool |Y|^n exceeds limit");
    }

    struct SegEntry {
        CoveringSet covering;
        std::vector<std::size_t> joint_counts;  // row-major (x,z), tie-break key
        double cond_rate;
    };
    std::vector<SegEntry> entries;

    std::vector<std::size_t> pick(groups.size(), 0);
    auto emit = [&]() {
        // Joint type of (x, z) induced by this conditional type.
        std::vector<std::size_t> joint(p_.x_size() * p_.z_size(), 0);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& comp = per_group[g][pick[g]];
            for (std::size_t i = 0; i < comp.size(); ++i) {
                joint[reach[g][i] * p_.z_size() + groups[g].symbol] += comp[i];
            }
        }
        std::vector<double> joint_p(joint.size());
        for (std::size_t i = 0; i < joint.size(); ++i) {
            joint_p[i] = static_cast<double>(joint[i]) / static_cast<double>(n_);
        }
        double cond_rate =
            conditional_rate_distortion_value(JointPmf(p_.x_size(), p_.z_size(), joint_p),
                                              d_, D_, opts_.rd);

        // Members of the conditional type class, groups being contiguous.
        std::vector<Sequence> targets{Sequence{}};
        for (std::size_t g = 0; g < groups.size(); ++g) {
            auto arr = group_arrangements(per_group[g][pick[g]], reach[g]);
            if (targets.size() * arr.size() > opts_.type_class_limit) {
                throw SizeLimitError("SiStrategy: conditional type class exceeds limit");
            }
            std::vector<Sequence> next;
            next.reserve(targets.size() * arr.size());
            for (const auto& head : targets) {
                for (const auto& tail : arr) {
                    Sequence s = head;
                    s.insert(s.end(), tail.begin(), tail.end());
                    next.push_back(std::move(s));
                }
            }
            targets = std::move(next);
        }

        SegEntry e;
        e.joint_counts = joint;
        e.cond_rate = cond_rate;
        std::vector<std::size_t> x_counts(p_.x_size(), 0);
        for (std::size_t x = 0; x < p_.x_size(); ++x) {
            for (std::size_t z = 0; z < p_.z_size(); ++z) {
                x_counts[x] += joint[x * p_.z_size() + z];
            }
        }
        e.covering.type = TypeComposition(n_, std::move(x_counts));
        e.covering.guesses = detail::greedy_cover(targets, pool, d_, D_, opts_.accept_tol);
        e.covering.rd_rate = cond_rate;
        e.covering.slack =
            std::log(static_cast<double>(e.covering.guesses.size())) /
                static_cast<double>(n_) -
            cond_rate;
        e.covering.verified = true;
        for (const auto& x : targets) {
            bool hit = false;
            for (const auto& y : e.covering.guesses) {
                if (accepts(x, y, d_, D_, opts_.accept_tol)) {
                    hit = true;
                    break;
                }
            }
            if (!hit) {
                e.covering.verified = false;
                break;
            }
        }
        entries.push_back(std::move(e));
    };

    auto rec = [&](auto&& self, std::size_t g) -> void {
        if (g == groups.size()) {
            emit();
            return;
        }
        for (std::size_t i = 0; i < per_group[g].size(); ++i) {
            pick[g] = i;
            self(self, g + 1);
        }
    };
    rec(rec, 0);

    std::stable_sort(entries.begin(), entries.end(), [](const SegEntry& a, const SegEntry& b) {
        if (a.cond_rate != b.cond_rate) return a.cond_rate < b.cond_rate;
        return a.joint_counts < b.joint_counts;
    });

    Strategy s;
    s.n = n_;
    s.x_size = p_.x_size();
    s.y_size = d_.y_size();
    for (auto& e : entries) s.segments.push_back(std::move(e.covering));
    detail::assemble_flat(s);
    return s;
}

Strategy SiStrategy::strategy_for(const Sequence& z) const {
    if (z.size() != n_) throw InvalidInputError("strategy_for: length mismatch");
    for (std::uint8_t sym : z) {
        if (sym >= p_.z_size()) throw InvalidInputError("strategy_for: z symbol out of range");
    }

    // Useless side information: one z-free strategy serves every z verbatim.
    if (independent_) {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = cache_.find(Sequence{});
        if (it == cache_.end()) {
            it = cache_.emplace(Sequence{}, build_strategy(n_, p_.x_marginal(), d_, D_, opts_))
                     .first;
        }
        return it->second;
    }

    Sequence sorted = z;
    std::sort(sorted.begin(), sorted.end());

    const Strategy* base = nullptr;
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = cache_.find(sorted);
        if (it == cache_.end()) {
            it = cache_.emplace(sorted, build_for_sorted(sorted)).first;
        }
        base = &it->second;
    }

    // perm[j] = position in z of the j-th coordinate of the sorted sequence.
    std::vector<std::size_t> perm(n_);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
    bool identity = std::is_sorted(z.begin(), z.end());
    if (identity) return *base;

    auto permute = [&](const Sequence& g) {
        Sequence out(n_);
        for (std::size_t j = 0; j < n_; ++j) out[perm[j]] = g[j];
        return out;
    };
    Strategy s = *base;
    for (auto& seg : s.segments) {
        for (auto& g : seg.guesses) g = permute(g);
    }
    for (auto& g : s.flat) g = permute(g);
    return s;
}

std::string SiStrategy::to_text() const {
    auto zs = enumerate_sequences(n_, p_.z_size(), opts_.type_class_limit);
    Pmf pz = p_.z_marginal();
    std::ostringstream out;
    for (const auto& z : zs) {
        double prob = 1.0;
        for (std::uint8_t sym : z) prob *= pz[sym];
        if (prob <= 0.0) continue;
        out << "# z-block";
        for (std::uint8_t sym : z) out << ' ' << static_cast<int>(sym);
        out << "\n";
        out << strategy_to_text(strategy_for(z));
    }
    return out.str();
}

SiStrategy build_si_strategy(std::size_t n, const JointPmf& p, const DistortionSpec& d,
                             double D, const GuessingOptions& opts) {
    return SiStrategy(n, p, d, D, opts);
}

std::optional<std::uint64_t> si_counting_function(const Sequence& x, const Sequence& z,
                                                  const SiStrategy& s,
                                                  const DistortionSpec& d, double D,
                                                  double accept_tol) {
    if (x.size() != z.size()) throw InvalidInputError("si_counting_function: length mismatch");
    Strategy strat = s.strategy_for(z);
    return counting_function(x, strat, d, D, accept_tol);
}

AttackReport evaluate_si_attack(const JointPmf& p, const SiStrategy& s,
                                const DistortionSpec& d, double D, SiMode mode, long trials,
                                std::uint64_t seed, std::size_t enum_limit) {
    AttackReport r;
    r.n = s.n();
    r.theory_value = std::numeric_limits<double>::quiet_NaN();

    if (mode == SiMode::kExact) {
        if (ipow_checked(p.x_size() * p.z_size(), s.n(), enum_limit) > enum_limit) {
            throw SizeLimitError("evaluate_si_attack: |XxZ|^n exceeds limit");
        }
        r.exact = true;
        double mean = 0.0;
        auto zs = enumerate_sequences(s.n(), p.z_size(), enum_limit);
        for (const auto& z : zs) {
            // skip unreachable z early
            bool reachable = true;
            for (std::uint8_t sym : z) {
                double m = 0.0;
                for (std::size_t x = 0; x < p.x_size(); ++x) m += p(x, sym);
                if (m <= 0.0) {
                    reachable = false;
                    break;
                }
            }
            if (!reachable) continue;
            Strategy strat = s.strategy_for(z);
            Sequence x(s.n(), 0);
            bool more = true;
            while (more) {
                double prob = 1.0;
                for (std::size_t i = 0; i < s.n(); ++i) prob *= p(x[i], z[i]);
                if (prob > 0.0) {
                    auto idx = counting_function(x, strat, d, D);
                    if (!idx) {
                        mean = kInfinity;
                        break;
                    }
                    mean += prob * static_cast<double>(*idx);
                }
                more = false;
                for (std::size_t j = s.n(); j-- > 0;) {
                    if (++x[j] < p.x_size()) {
                        more = true;
                        break;
                    }
                    x[j] = 0;
                }
            }
            if (std::isinf(mean)) break;
        }
        r.mean_guesses = mean;
        r.exponent_estimate = std::log(mean) / static_cast<double>(s.n());
        return r;
    }

    if (trials < 1) throw InvalidInputError("evaluate_si_attack: trials must be >= 1");
    r.exact = false;
    r.trials = trials;
    r.seed = seed;
    std::vector<double> cdf(p.probs().size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        acc += p.probs()[i];
        cdf[i] = acc;
    }
    cdf.back() = std::max(cdf.back(), 1.0);

    std::mt19937_64 rng(seed);
    double mean = 0.0;
    double m2 = 0.0;
    Sequence x(s.n()), z(s.n());
    for (long t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < s.n(); ++i) {
            double u = uniform01(rng);
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            std::size_t cell =
                std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                                      cdf.size() - 1);
            x[i] = static_cast<std::uint8_t>(cell / p.z_size());
            z[i] = static_cast<std::uint8_t>(cell % p.z_size());
        }
        auto idx = si_counting_function(x, z, s, d, D);
        double g = idx ? static_cast<double>(*idx) : kInfinity;
        double delta = g - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (g - mean);
    }
    r.mean_guesses = mean;
    r.exponent_estimate = std::log(mean) / static_cast<double>(s.n());
    r.std_error = trials > 1 ? std::sqrt(m2 / (static_cast<double>(trials) - 1.0) /
                                         static_cast<double>(trials))
                             : 0.0;
    return r;
}

}  // namespace authguess
