#include "authguess/guessing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "authguess/errors.hpp"

namespace authguess {

namespace {

struct SequenceHash {
    std::size_t operator()(const Sequence& s) const {
        std::size_t h = 1469598103934665603ULL;
        for (std::uint8_t c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

// 1-based index of the first guess accepted for x, over a flat list.
std::optional<std::uint64_t> first_accepted_index(const Sequence& x,
                                                  const std::vector<Sequence>& guesses,
                                                  const DistortionSpec& d, double D,
                                                  double accept_tol) {
    const double budget = D * static_cast<double>(x.size()) +
                          accept_tol * static_cast<double>(x.size());
    for (std::size_t j = 0; j < guesses.size(); ++j) {
        const Sequence& y = guesses[j];
        double sum = 0.0;
        bool ok = true;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sum += d(x[i], y[i]);
            if (sum > budget) {
                ok = false;
                break;
            }
        }
        if (ok) return j + 1;
    }
    return std::nullopt;
}

std::uint64_t ipow_checked(std::size_t base, std::size_t exp, std::size_t limit) {
    std::uint64_t v = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (v > limit / std::max<std::size_t>(base, 1)) return limit + 1;
        v *= base;
    }
    return v;
}

// Portable uniform double in [0,1) from a 64-bit generator.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> cumulative(const std::vector<double>& p) {
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    cdf.back() = std::max(cdf.back(), 1.0);
    return cdf;
}

Sequence zero_image_sequence(const Sequence& x, const DistortionSpec& d) {
    Sequence y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = static_cast<std::uint8_t>(d.zero_images(x[i]).front());
    }
    return y;
}

}  // namespace

namespace detail {

// Used by both the per-type coverings here and the conditional coverings in
// side_info.
std::vector<Sequence> greedy_cover(const std::vector<Sequence>& targets,
                                   const std::vector<Sequence>& pool,
                                   const DistortionSpec& d, double D, double accept_tol) {
    const std::size_t n = targets.empty() ? 0 : targets[0].size();
    const double budget = D * static_cast<double>(n) + accept_tol * static_cast<double>(n);
    auto accepted = [&](const Sequence& x, const Sequence& y) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += d(x[i], y[i]);
            if (sum > budget) return false;
        }
        return true;
    };

    const std::size_t words = (targets.size() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> masks;
    const bool use_masks = pool.size() * words <= (1u << 24);
    if (use_masks) {
        masks.assign(pool.size(), std::vector<std::uint64_t>(words, 0));
        for (std::size_t c = 0; c < pool.size(); ++c) {
            for (std::size_t t = 0; t < targets.size(); ++t) {
                if (accepted(targets[t], pool[c])) masks[c][t / 64] |= 1ULL << (t % 64);
            }
        }
    }

    std::vector<std::uint64_t> covered(words, 0);
    std::size_t uncovered = targets.size();
    std::vector<Sequence> out;
    while (uncovered > 0) {
        std::size_t best = pool.size();
        std::size_t best_gain = 0;
        for (std::size_t c = 0; c < pool.size(); ++c) {
            std::size_t gain = 0;
            if (use_masks) {
                for (std::size_t w = 0; w < words; ++w) {
                    gain += static_cast<std::size_t>(
                        std::popcount(masks[c][w] & ~covered[w]));
                }
            } else {
                for (std::size_t t = 0; t < targets.size(); ++t) {
                    if (!(covered[t / 64] >> (t % 64) & 1) && accepted(targets[t], pool[c])) {
                        ++gain;
                    }
                }
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = c;
            }
        }
        if (best_gain == 0) break;  // pool exhausted; top-up below
        out.push_back(pool[best]);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (!(covered[t / 64] >> (t % 64) & 1) && accepted(targets[t], pool[best])) {
                covered[t / 64] |= 1ULL << (t % 64);
                --uncovered;
            }
        }
    }
    // Exhaustive top-up: any still-uncovered target gets its zero-distortion
    // image, which always satisfies the constraint.
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (covered[t / 64] >> (t % 64) & 1) continue;
        Sequence y = zero_image_sequence(targets[t], d);
        out.push_back(y);
        for (std::size_t u = t; u < targets.size(); ++u) {
            if (!(covered[u / 64] >> (u % 64) & 1) && accepted(targets[u], y)) {
                covered[u / 64] |= 1ULL << (u % 64);
                --uncovered;
            }
        }
    }
    return out;
}

void assemble_flat(Strategy& s) {
    std::unordered_set<Sequence, SequenceHash> seen;
    s.flat.clear();
    for (const auto& seg : s.segments) {
        for (const auto& g : seg.guesses) {
            if (seen.insert(g).second) s.flat.push_back(g);
        }
    }
}

}  // namespace detail

namespace {

std::vector<Sequence> build_candidate_pool(const TypeComposition& t, const DistortionSpec& d,
                                           double D, const GuessingOptions& opts) {
    const std::size_t n = t.n;
    if (ipow_checked(d.y_size(), n, opts.candidate_pool_limit) <= opts.candidate_pool_limit) {
        return enumerate_sequences(n, d.y_size(), opts.candidate_pool_limit);
    }
    // Sample i.i.d. from the n-fold product of the RD-optimal output marginal.
    RdResult rd = rate_distortion(t.to_pmf(), d, D, opts.rd);
    std::vector<double> qout(d.y_size(), 0.0);
    Pmf q = t.to_pmf();
    for (std::size_t x = 0; x < q.size(); ++x) {
        for (std::size_t y = 0; y < d.y_size(); ++y) {
            qout[y] += q[x] * rd.test_channel[x][y];
        }
    }
    auto cdf = cumulative(qout);
    std::mt19937_64 rng(opts.sample_seed);
    std::unordered_set<Sequence, SequenceHash> seen;
    std::vector<Sequence> pool;
    pool.reserve(opts.sample_count);
    for (std::size_t i = 0; i < opts.sample_count; ++i) {
        Sequence y(n);
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = static_cast<std::uint8_t>(sample_index(cdf, uniform01(rng)));
        }
        if (seen.insert(y).second) pool.push_back(std::move(y));
    }
    return pool;
}

}  // namespace

bool accepts(const Sequence& x, const Sequence& y, const DistortionSpec& d, double D,
             double accept_tol) {
    if (x.size() != y.size()) throw InvalidInputError("accepts: length mismatch");
    double budget = (D + accept_tol) * static_cast<double>(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += d(x[i], y[i]);
    return sum <= budget;
}

std::vector<Sequence> enumerate_sequences(std::size_t n, std::size_t alphabet,
                                          std::size_t limit) {
    std::uint64_t total = ipow_checked(alphabet, n, limit);
    if (total > limit) {
        throw SizeLimitError("enumerate_sequences: " + std::to_string(alphabet) + "^" +
                             std::to_string(n) + " exceeds limit " + std::to_string(limit));
    }
    std::vector<Sequence> out;
    out.reserve(total);
    Sequence s(n, 0);
    for (std::uint64_t i = 0; i < total; ++i) {
        out.push_back(s);
        for (std::size_t j = n; j-- > 0;) {
            if (++s[j] < alphabet) break;
            s[j] = 0;
        }
    }
    return out;
}

std::vector<Sequence> type_class_sequences(const TypeComposition& t, std::size_t limit) {
    double log_size = log_type_class_size(t);
    if (log_size > std::log(static_cast<double>(limit)) + 1e-9) {
        throw SizeLimitError("type_class_sequences: |T_Q| exceeds limit");
    }
    Sequence base;
    base.reserve(t.n);
    for (std::size_t sym = 0; sym < t.counts.size(); ++sym) {
        base.insert(base.end(), t.counts[sym], static_cast<std::uint8_t>(sym));
    }
    std::vector<Sequence> out;
    do {
        out.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    return out;
}

CoveringSet build_covering(const TypeComposition& t, const DistortionSpec& d, double D,
                           const GuessingOptions& opts) {
    if (t.counts.size() != d.x_size()) {
        throw InvalidInputError("build_covering: alphabet mismatch");
    }
    auto targets = type_class_sequences(t, opts.type_class_limit);
    auto pool = build_candidate_pool(t, d, D, opts);

    CoveringSet cs;
    cs.type = t;
    cs.guesses = detail::greedy_cover(targets, pool, d, D, opts.accept_tol);
    cs.rd_rate = rate_distortion(t.to_pmf(), d, D, opts.rd).rate;
    cs.slack = std::log(static_cast<double>(cs.guesses.size())) / static_cast<double>(t.n) -
               cs.rd_rate;

    cs.verified = true;
    for (const auto& x : targets) {
        if (!first_accepted_index(x, cs.guesses, d, D, opts.accept_tol)) {
            cs.verified = false;
            break;
        }
    }
    return cs;
}

Strategy build_strategy(std::size_t n, const Pmf& p, const DistortionSpec& d, double D,
                        const GuessingOptions& opts, StrategyOrdering ordering) {
    auto types = enumerate_types(n, p.size());
    Strategy s;
    s.n = n;
    s.x_size = p.size();
    s.y_size = d.y_size();
    s.segments.reserve(types.size());
    for (const auto& t : types) s.segments.push_back(build_covering(t, d, D, opts));

    auto key = [&](const CoveringSet& c) {
        if (ordering == StrategyOrdering::kRate) return c.rd_rate;
        // Likelihood-weighted variant: types that are both cheap to cover and
        // probable under p come first. Unreachable types sort last.
        double kl = relative_entropy(c.type.to_pmf(), p);
        return c.rd_rate + kl;
    };
    std::stable_sort(s.segments.begin(), s.segments.end(),
                     [&](const CoveringSet& a, const CoveringSet& b) {
                         double ka = key(a), kb = key(b);
                         if (ka != kb) return ka < kb;
                         return a.type < b.type;
                     });

    detail::assemble_flat(s);
    return s;
}

std::optional<std::uint64_t> counting_function(const Sequence& x, const Strategy& s,
                                               const DistortionSpec& d, double D,
                                               double accept_tol) {
    if (x.size() != s.n) throw InvalidInputError("counting_function: length mismatch");
    return first_accepted_index(x, s.flat, d, D, accept_tol);
}

AttackReport exact_expected_guesses(const Pmf& p, const Strategy& s, const DistortionSpec& d,
                                    double D, std::size_t enum_limit) {
    if (ipow_checked(p.size(), s.n, enum_limit) > enum_limit) {
        throw SizeLimitError("exact_expected_guesses: |X|^n exceeds limit");
    }
    AttackReport r;
    r.n = s.n;
    r.exact = true;
    double mean = 0.0;
    Sequence x(s.n, 0);
    bool more = true;
    while (more) {
        double prob = 1.0;
        for (std::uint8_t sym : x) prob *= p[sym];
        if (prob > 0.0) {
            auto idx = first_accepted_index(x, s.flat, d, D, 1e-9);
            if (!idx) {
                mean = kInfinity;
                break;
            }
            mean += prob * static_cast<double>(*idx);
        }
        more = false;
        for (std::size_t j = s.n; j-- > 0;) {
            if (++x[j] < p.size()) {
                more = true;
                break;
            }
            x[j] = 0;
        }
    }
    r.mean_guesses = mean;
    r.exponent_estimate = std::log(mean) / static_cast<double>(s.n);
    r.theory_value = std::numeric_limits<double>::quiet_NaN();
    return r;
}

AttackReport simulate_attack(const Pmf& p, const Strategy& s, const DistortionSpec& d,
                             double D, long trials, std::uint64_t seed) {
    if (trials < 1) throw InvalidInputError("simulate_attack: trials must be >= 1");
    AttackReport r;
    r.n = s.n;
    r.exact = false;
    r.trials = trials;
    r.seed = seed;

    auto cdf = cumulative(p.probs());
    std::mt19937_64 rng(seed);
    double mean = 0.0;
    double m2 = 0.0;
    long done = 0;
    Sequence x(s.n);
    for (long t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < s.n; ++i) {
            x[i] = static_cast<std::uint8_t>(sample_index(cdf, uniform01(rng)));
        }
        auto idx = first_accepted_index(x, s.flat, d, D, 1e-9);
        double g = idx ? static_cast<double>(*idx) : kInfinity;
        ++done;
        double delta = g - mean;
        mean += delta / static_cast<double>(done);
        m2 += delta * (g - mean);
    }
    r.mean_guesses = mean;
    r.exponent_estimate = std::log(mean) / static_cast<double>(s.n);
    r.std_error = trials > 1 ? std::sqrt(m2 / (static_cast<double>(trials) - 1.0) /
                                         static_cast<double>(trials))
                             : 0.0;
    r.theory_value = std::numeric_limits<double>::quiet_NaN();
    return r;
}

namespace {

double expected_index(const std::vector<std::size_t>& order,
                      const std::vector<std::vector<std::uint64_t>>& masks,
                      const std::vector<double>& probs) {
    double mean = 0.0;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        if (probs[t] <= 0.0) continue;
        bool found = false;
        for (std::size_t j = 0; j < order.size(); ++j) {
            if (masks[order[j]][t / 64] >> (t % 64) & 1) {
                mean += probs[t] * static_cast<double>(j + 1);
                found = true;
                break;
            }
        }
        if (!found) return kInfinity;
    }
    return mean;
}

}  // namespace

OracleResult oracle_best_strategy(const Pmf& p, const DistortionSpec& d, double D,
                                  std::size_t n, const GuessingOptions& opts,
                                  std::size_t max_exhaustive) {
    auto xs = enumerate_sequences(n, p.size(), opts.type_class_limit);
    auto pool = enumerate_sequences(n, d.y_size(), opts.candidate_pool_limit);

    std::vector<double> probs(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) {
        double prob = 1.0;
        for (std::uint8_t sym : xs[t]) prob *= p[sym];
        probs[t] = prob;
    }
    const std::size_t words = (xs.size() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> masks(pool.size(),
                                                  std::vector<std::uint64_t>(words, 0));
    for (std::size_t c = 0; c < pool.size(); ++c) {
        for (std::size_t t = 0; t < xs.size(); ++t) {
            if (accepts(xs[t], pool[c], d, D, opts.accept_tol)) {
                masks[c][t / 64] |= 1ULL << (t % 64);
            }
        }
    }

    // Greedy: next guess maximizes the remaining probability mass covered.
    std::vector<std::size_t> greedy_order;
    {
        std::vector<double> rem = probs;
        double remaining = std::accumulate(rem.begin(), rem.end(), 0.0);
        while (remaining > 1e-15) {
            std::size_t best = pool.size();
            double best_gain = 0.0;
            for (std::size_t c = 0; c < pool.size(); ++c) {
                double gain = 0.0;
                for (std::size_t t = 0; t < xs.size(); ++t) {
                    if (rem[t] > 0.0 && (masks[c][t / 64] >> (t % 64) & 1)) gain += rem[t];
                }
                if (gain > best_gain) {
                    best_gain = gain;
                    best = c;
                }
            }
            if (best == pool.size()) break;
            greedy_order.push_back(best);
            for (std::size_t t = 0; t < xs.size(); ++t) {
                if (masks[best][t / 64] >> (t % 64) & 1) {
                    remaining -= rem[t];
                    rem[t] = 0.0;
                }
            }
        }
    }
    double greedy_mean = expected_index(greedy_order, masks, probs);

    // Exhaustive: find one minimum-cardinality cover of the reachable mass,
    // then try every ordering of it.
    bool exhaustive = false;
    std::vector<std::size_t> best_order = greedy_order;
    double best_mean = greedy_mean;
    if (pool.size() <= 24) {
        std::vector<std::size_t> cover;
        for (std::size_t k = 1; k <= std::min(max_exhaustive, pool.size()) && cover.empty();
             ++k) {
            std::vector<std::size_t> idx(k);
            for (std::size_t i = 0; i < k; ++i) idx[i] = i;
            while (true) {
                bool covers = true;
                for (std::size_t t = 0; t < xs.size() && covers; ++t) {
                    if (probs[t] <= 0.0) continue;
                    bool hit = false;
                    for (std::size_t i : idx) {
                        if (masks[i][t / 64] >> (t % 64) & 1) {
                            hit = true;
                            break;
                        }
                    }
                    covers = hit;
                }
                if (covers) {
                    cover = idx;
                    break;
                }
                // next combination
                std::size_t i = k;
                while (i-- > 0) {
                    if (idx[i] + (k - i) < pool.size()) {
                        ++idx[i];
                        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                        break;
                    }
                    if (i == 0) goto next_k;
                }
            }
        next_k:;
        }
        if (!cover.empty()) {
            exhaustive = true;
            std::sort(cover.begin(), cover.end());
            std::vector<std::size_t> perm = cover;
            do {
                double mean = expected_index(perm, masks, probs);
                if (mean < best_mean) {
                    best_mean = mean;
                    best_order = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }

    OracleResult res;
    res.exhaustive = exhaustive;
    res.strategy.n = n;
    res.strategy.x_size = p.size();
    res.strategy.y_size = d.y_size();
    for (std::size_t c : best_order) res.strategy.flat.push_back(pool[c]);
    res.report.n = n;
    res.report.exact = true;
    res.report.mean_guesses = best_mean;
    res.report.exponent_estimate = std::log(best_mean) / static_cast<double>(n);
    res.report.theory_value = std::numeric_limits<double>::quiet_NaN();
    return res;
}

std::string strategy_to_text(const Strategy& s) {
    std::ostringstream out;
    out << "# strategy n=" << s.n << " x=" << s.x_size << " y=" << s.y_size
        << " segments=" << s.segments.size() << "\n";
    char buf[64];
    auto write_guess = [&](const Sequence& g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i) out << ' ';
            out << static_cast<int>(g[i]);
        }
        out << "\n";
    };
    for (const auto& seg : s.segments) {
        out << "# segment type";
        for (std::size_t c : seg.type.counts) out << ' ' << c;
        std::snprintf(buf, sizeof buf, "%.17g", seg.rd_rate);
        out << " rate " << buf;
        std::snprintf(buf, sizeof buf, "%.17g", seg.slack);
        out << " slack " << buf;
        out << " verified " << (seg.verified ? 1 : 0) << "\n";
        for (const auto& g : seg.guesses) write_guess(g);
    }
    if (s.segments.empty()) {
        out << "# flat\n";
        for (const auto& g : s.flat) write_guess(g);
    }
    return out.str();
}

Strategy strategy_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Strategy s;
    bool header_seen = false;
    CoveringSet* current = nullptr;
    bool flat_mode = false;

    auto parse_guess = [&](const std::string& l) {
        Sequence g;
        std::istringstream ls(l);
        long v;
        while (ls >> v) {
            if (v < 0 || v > 255) throw InvalidInputError("strategy_from_text: bad symbol");
            g.push_back(static_cast<std::uint8_t>(v));
        }
        if (g.size() != s.n) throw InvalidInputError("strategy_from_text: bad guess length");
        return g;
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string kw;
            ls >> kw;
            if (kw == "strategy") {
                std::string tok;
                while (ls >> tok) {
                    auto eq = tok.find('=');
                    if (eq == std::string::npos) continue;
                    auto key = tok.substr(0, eq);
                    auto val = std::stoull(tok.substr(eq + 1));
                    if (key == "n") s.n = val;
                    else if (key == "x") s.x_size = val;
                    else if (key == "y") s.y_size = val;
                }
                header_seen = true;
            } else if (kw == "segment") {
                std::string tok;
                ls >> tok;  // "type"
                std::vector<std::size_t> counts;
                CoveringSet seg;
                while (ls >> tok) {
                    if (tok == "rate") {
                        ls >> seg.rd_rate;
                    } else if (tok == "slack") {
                        ls >> seg.slack;
                    } else if (tok == "verified") {
                        int v;
                        ls >> v;
                        seg.verified = v != 0;
                    } else {
                        counts.push_back(std::stoull(tok));
                    }
                }
                seg.type = TypeComposition(s.n, std::move(counts));
                s.segments.push_back(std::move(seg));
                current = &s.segments.back();
            } else if (kw == "flat") {
                flat_mode = true;
            }
            continue;
        }
        if (!header_seen) throw InvalidInputError("strategy_from_text: missing header");
        if (flat_mode) {
            s.flat.push_back(parse_guess(line));
        } else if (current) {
            current->guesses.push_back(parse_guess(line));
        } else {
            throw InvalidInputError("strategy_from_text: guess outside any segment");
        }
    }

    if (!flat_mode) detail::assemble_flat(s);
    return s;
}

}  // namespace authguess
