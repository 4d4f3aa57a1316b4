#pragma once

// Side-information adversary: per-z guessing strategies built from
// conditional type-class coverings, the conditional counting function, and
// attack evaluation against a joint source.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "authguess/guessing.hpp"
#include "authguess/prob.hpp"

namespace authguess {

enum class SiMode { kExact, kMonteCarlo };

// Per-z strategies, materialized on demand. Strategies for z-sequences that
// are coordinate permutations of each other share one construction: the
// strategy is built for the sorted z and permuted back, which is valid since
// the mean distortion is permutation invariant.
class SiStrategy {
public:
    SiStrategy(std::size_t n, JointPmf p, DistortionSpec d, double D,
               GuessingOptions opts = {});

    std::size_t n() const { return n_; }
    const JointPmf& source() const { return p_; }

    // The strategy used for side information z (materializing it if needed).
    Strategy strategy_for(const Sequence& z) const;

    // Export every per-z block for the reachable z-sequences. Requires
    // |Z|^n within the enumeration limit.
    std::string to_text() const;

private:
    Strategy build_for_sorted(const Sequence& z_sorted) const;

    std::size_t n_;
    JointPmf p_;
    DistortionSpec d_;
    double D_;
    GuessingOptions opts_;
    bool independent_;  // p factorizes: side information is useless
    mutable std::map<Sequence, Strategy> cache_;  // keyed by sorted z
};

SiStrategy build_si_strategy(std::size_t n, const JointPmf& p, const DistortionSpec& d,
                             double D, const GuessingOptions& opts = {});

// 1-based index of the first accepted guess in the z-specific list.
std::optional<std::uint64_t> si_counting_function(const Sequence& x, const Sequence& z,
                                                  const SiStrategy& s,
                                                  const DistortionSpec& d, double D,
                                                  double accept_tol = 1e-9);

// Expectation of the conditional counting function over the joint law.
AttackReport evaluate_si_attack(const JointPmf& p, const SiStrategy& s,
                                const DistortionSpec& d, double D, SiMode mode,
                                long trials = 0, std::uint64_t seed = 0,
                                std::size_t enum_limit = 1'000'000);

}  // namespace authguess
