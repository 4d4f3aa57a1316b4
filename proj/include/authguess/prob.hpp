#pragma once

// Finite-alphabet probability primitives and method-of-types combinatorics.
// All entropic quantities are in nats; log-space arithmetic is used for
// type-class sizes and probabilities so that n in the hundreds stays exact
// enough.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace authguess {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kPmfSumTol = 1e-12;

// Probability mass function over a finite alphabet {0,...,k-1}.
class Pmf {
public:
    explicit Pmf(std::vector<double> probs);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }

    // Indices with strictly positive mass.
    std::vector<std::size_t> support() const;

    bool operator==(const Pmf&) const = default;

private:
    std::vector<double> probs_;
};

// Joint pmf over X x Z, row-major: prob(x, z).
class JointPmf {
public:
    JointPmf(std::size_t x_size, std::size_t z_size, std::vector<double> probs);

    std::size_t x_size() const { return x_size_; }
    std::size_t z_size() const { return z_size_; }
    double operator()(std::size_t x, std::size_t z) const { return probs_[x * z_size_ + z]; }
    const std::vector<double>& probs() const { return probs_; }

    Pmf x_marginal() const;
    Pmf z_marginal() const;
    // Conditional P(x | z); requires z_marginal()[z] > 0.
    Pmf conditional_x_given_z(std::size_t z) const;

    // True if prob(x,z) == px(x)*pz(z) for all entries, within tol.
    bool factorizes(double tol = 1e-9) const;

    bool operator==(const JointPmf&) const = default;

private:
    std::size_t x_size_;
    std::size_t z_size_;
    std::vector<double> probs_;
};

// A type: integer composition of n over the alphabet.
struct TypeComposition {
    std::size_t n = 0;
    std::vector<std::size_t> counts;

    TypeComposition() = default;
    TypeComposition(std::size_t n, std::vector<std::size_t> counts);

    Pmf to_pmf() const;

    bool operator==(const TypeComposition&) const = default;
    // Lexicographic order on counts; the canonical tie-break everywhere.
    bool operator<(const TypeComposition& other) const { return counts < other.counts; }
};

// Finite distortion matrix d(x,y) with at least one zero entry per row.
class DistortionSpec {
public:
    DistortionSpec(std::size_t x_size, std::size_t y_size, std::vector<double> d);

    // Hamming distortion on a k-symbol alphabet (X = Y).
    static DistortionSpec hamming(std::size_t k);

    std::size_t x_size() const { return x_size_; }
    std::size_t y_size() const { return y_size_; }
    double operator()(std::size_t x, std::size_t y) const { return d_[x * y_size_ + y]; }
    double d_max() const { return d_max_; }

    // Reconstruction symbols with d(x,y) == 0.
    const std::vector<std::size_t>& zero_images(std::size_t x) const { return zero_images_[x]; }
    // True when every x has exactly one zero-distortion y.
    bool has_unique_zero_structure() const;

    bool operator==(const DistortionSpec& o) const {
        return x_size_ == o.x_size_ && y_size_ == o.y_size_ && d_ == o.d_;
    }

private:
    std::size_t x_size_;
    std::size_t y_size_;
    std::vector<double> d_;
    double d_max_;
    std::vector<std::vector<std::size_t>> zero_images_;
};

// Shannon entropy in nats, 0 ln 0 := 0.
double shannon_entropy(const Pmf& p);

// Relative entropy D(q||p) in nats; +inf if q is not absolutely continuous
// w.r.t. p.
double relative_entropy(const Pmf& q, const Pmf& p);

// Renyi entropy of order 1/2: 2 ln sum_x sqrt(p(x)).
double renyi_half_entropy(const Pmf& p);

// All types of length-n sequences over a k-symbol alphabet, in lexicographic
// order on the count vectors. Throws SizeLimitError if the count C(n+k-1,k-1)
// exceeds max_count.
std::vector<TypeComposition> enumerate_types(std::size_t n, std::size_t k,
                                             std::uint64_t max_count = 10'000'000);

// ln |T_Q| = ln multinomial(n; counts), via lgamma.
double log_type_class_size(const TypeComposition& t);

// Exact ln P^n(T_Q); -inf if some counts(x) > 0 with p(x) = 0.
double log_type_class_prob(const TypeComposition& t, const Pmf& p);

}  // namespace authguess
