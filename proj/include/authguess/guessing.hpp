#pragma once

// Constructive guessing adversary: type-covering sets, the rate-ordered
// strategy built from them, the counting function, exact and Monte-Carlo
// attack evaluation, and brute-force oracles for micro instances.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "authguess/prob.hpp"
#include "authguess/rd.hpp"

namespace authguess {

// Fixed-length sequence of symbol indices.
using Sequence = std::vector<std::uint8_t>;

struct GuessingOptions {
    std::size_t type_class_limit = 1'000'000;
    std::size_t candidate_pool_limit = 1'000'000;
    std::size_t sample_count = 100'000;   // sampled pool size when Y^n is too big
    std::uint64_t sample_seed = 0x9e3779b97f4a7c15ULL;
    double accept_tol = 1e-9;             // per-symbol slack on the distortion test
    RdOptions rd;
};

struct CoveringSet {
    TypeComposition type;
    std::vector<Sequence> guesses;
    bool verified = false;
    double rd_rate = 0.0;   // R(D, Q_type)
    double slack = 0.0;     // (1/n) ln |guesses| - rd_rate

    bool operator==(const CoveringSet&) const = default;
};

enum class StrategyOrdering {
    kRate,          // non-decreasing R(D, Q_k); matches the construction in use
    kRateMinusKl,   // optional mode: R(D, Q_k) - D(Q_k || P)
};

struct Strategy {
    std::size_t n = 0;
    std::size_t x_size = 0;
    std::size_t y_size = 0;
    std::vector<CoveringSet> segments;
    // Concatenation of the segments with duplicates removed, first occurrence
    // kept. Oracle strategies have no segments and populate this directly.
    std::vector<Sequence> flat;

    bool operator==(const Strategy&) const = default;
};

struct AttackReport {
    std::size_t n = 0;
    bool exact = false;
    long trials = 0;
    double mean_guesses = 0.0;
    double exponent_estimate = 0.0;  // (1/n) ln mean_guesses
    double std_error = 0.0;          // Monte-Carlo only
    double theory_value = 0.0;       // filled by callers that computed E(D)
    std::uint64_t seed = 0;
};

// Mean-distortion acceptance test: sum_i d(x_i, y_i) <= n D (+ tolerance).
bool accepts(const Sequence& x, const Sequence& y, const DistortionSpec& d, double D,
             double accept_tol = 1e-9);

// All members of the type class T_Q, lexicographic order.
std::vector<Sequence> type_class_sequences(const TypeComposition& t,
                                           std::size_t limit = 1'000'000);

// All of A^n in lexicographic order.
std::vector<Sequence> enumerate_sequences(std::size_t n, std::size_t alphabet,
                                          std::size_t limit = 1'000'000);

// Greedy maximum-coverage D-covering of the type class of t.
CoveringSet build_covering(const TypeComposition& t, const DistortionSpec& d, double D,
                           const GuessingOptions& opts = {});

// Coverings for every type of length n, concatenated by non-decreasing
// R(D, Q_k) with lexicographic type tie-break. Independent of p except for
// the alphabet size (and the KL term in the optional ordering mode).
Strategy build_strategy(std::size_t n, const Pmf& p, const DistortionSpec& d, double D,
                        const GuessingOptions& opts = {},
                        StrategyOrdering ordering = StrategyOrdering::kRate);

// 1-based index of the first accepted guess; nullopt if none (G = infinity).
std::optional<std::uint64_t> counting_function(const Sequence& x, const Strategy& s,
                                               const DistortionSpec& d, double D,
                                               double accept_tol = 1e-9);

// Exact E_P[G] by probability-weighted enumeration of X^n.
AttackReport exact_expected_guesses(const Pmf& p, const Strategy& s, const DistortionSpec& d,
                                    double D, std::size_t enum_limit = 1'000'000);

// Monte-Carlo estimate of the same expectation; deterministic given seed.
AttackReport simulate_attack(const Pmf& p, const Strategy& s, const DistortionSpec& d,
                             double D, long trials, std::uint64_t seed);

struct OracleResult {
    Strategy strategy;
    AttackReport report;
    bool exhaustive = false;  // false: greedy heuristic was used
};

// Brute-force instantiation of the min over strategies. Exhaustive mode
// orders a minimum-cardinality cover optimally (min-sum set cover with
// weights P^n) when that cover has at most max_exhaustive guesses; otherwise
// falls back to the greedy probability-mass rule, flagged in the result.
OracleResult oracle_best_strategy(const Pmf& p, const DistortionSpec& d, double D,
                                  std::size_t n, const GuessingOptions& opts = {},
                                  std::size_t max_exhaustive = 8);

// Line-oriented strategy export: one guess per line as space-separated symbol
// indices, segments introduced by comment lines carrying the type counts and
// R(D,Q_k). Bit-exact round-trip.
std::string strategy_to_text(const Strategy& s);
Strategy strategy_from_text(const std::string& text);

namespace detail {

// Greedy maximum-coverage cover of an explicit target list, with an
// exhaustive zero-image top-up pass guaranteeing completeness.
std::vector<Sequence> greedy_cover(const std::vector<Sequence>& targets,
                                   const std::vector<Sequence>& pool,
                                   const DistortionSpec& d, double D, double accept_tol);

// Concatenate segment guesses into the flat list, first occurrence kept.
void assemble_flat(Strategy& s);

}  // namespace detail

}  // namespace authguess
