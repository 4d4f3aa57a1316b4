#include "authguess/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "authguess/errors.hpp"

namespace authguess {

namespace {

void check_probs(const std::vector<double>& probs, const char* what) {
    if (probs.empty()) {
        throw InvalidInputError(std::string(what) + ": empty probability vector");
    }
    double sum = 0.0;
    for (double v : probs) {
        if (!(v >= 0.0) || v > 1.0 + kPmfSumTol) {
            throw InvalidInputError(std::string(what) + ": entry out of [0,1]: " +
                                    std::to_string(v));
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kPmfSumTol) {
        throw InvalidInputError(std::string(what) + ": probabilities sum to " +
                                std::to_string(sum) + ", expected 1");
    }
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    check_probs(probs_, "Pmf");
}

std::vector<std::size_t> Pmf::support() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (probs_[i] > 0.0) idx.push_back(i);
    }
    return idx;
}

JointPmf::JointPmf(std::size_t x_size, std::size_t z_size, std::vector<double> probs)
    : x_size_(x_size), z_size_(z_size), probs_(std::move(probs)) {
    if (x_size_ == 0 || z_size_ == 0 || probs_.size() != x_size_ * z_size_) {
        throw InvalidInputError("JointPmf: dimension mismatch");
    }
    check_probs(probs_, "JointPmf");
}

Pmf JointPmf::x_marginal() const {
    std::vector<double> m(x_size_, 0.0);
    for (std::size_t x = 0; x < x_size_; ++x)
        for (std::size_t z = 0; z < z_size_; ++z) m[x] += (*this)(x, z);
    // guard against accumulated rounding
    double s = std::accumulate(m.begin(), m.end(), 0.0);
    for (double& v : m) v /= s;
    return Pmf(m);
}

Pmf JointPmf::z_marginal() const {
    std::vector<double> m(z_size_, 0.0);
    for (std::size_t x = 0; x < x_size_; ++x)
        for (std::size_t z = 0; z < z_size_; ++z) m[z] += (*this)(x, z);
    double s = std::accumulate(m.begin(), m.end(), 0.0);
    for (double& v : m) v /= s;
    return Pmf(m);
}

Pmf JointPmf::conditional_x_given_z(std::size_t z) const {
    double pz = 0.0;
    for (std::size_t x = 0; x < x_size_; ++x) pz += (*this)(x, z);
    if (pz <= 0.0) {
        throw InvalidInputError("conditional_x_given_z: conditioning on zero-probability z");
    }
    std::vector<double> c(x_size_);
    for (std::size_t x = 0; x < x_size_; ++x) c[x] = (*this)(x, z) / pz;
    double s = std::accumulate(c.begin(), c.end(), 0.0);
    for (double& v : c) v /= s;
    return Pmf(c);
}

bool JointPmf::factorizes(double tol) const {
    Pmf px = x_marginal();
    Pmf pz = z_marginal();
    for (std::size_t x = 0; x < x_size_; ++x)
        for (std::size_t z = 0; z < z_size_; ++z)
            if (std::abs((*this)(x, z) - px[x] * pz[z]) > tol) return false;
    return true;
}

TypeComposition::TypeComposition(std::size_t n_, std::vector<std::size_t> counts_)
    : n(n_), counts(std::move(counts_)) {
    std::size_t sum = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (counts.empty() || sum != n) {
        throw InvalidInputError("TypeComposition: counts must sum to n");
    }
}

Pmf TypeComposition::to_pmf() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    }
    return Pmf(p);
}

DistortionSpec::DistortionSpec(std::size_t x_size, std::size_t y_size, std::vector<double> d)
    : x_size_(x_size), y_size_(y_size), d_(std::move(d)), d_max_(0.0) {
    if (x_size_ == 0 || y_size_ == 0 || d_.size() != x_size_ * y_size_) {
        throw InvalidInputError("DistortionSpec: dimension mismatch");
    }
    zero_images_.resize(x_size_);
    for (std::size_t x = 0; x < x_size_; ++x) {
        for (std::size_t y = 0; y < y_size_; ++y) {
            double v = (*this)(x, y);
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw InvalidInputError("DistortionSpec: entries must be finite and >= 0");
            }
            d_max_ = std::max(d_max_, v);
            if (v == 0.0) zero_images_[x].push_back(y);
        }
        if (zero_images_[x].empty()) {
            throw InvalidInputError("DistortionSpec: row " + std::to_string(x) +
                                    " has no zero-distortion reconstruction symbol");
        }
    }
}

DistortionSpec DistortionSpec::hamming(std::size_t k) {
    std::vector<double> d(k * k, 1.0);
    for (std::size_t i = 0; i < k; ++i) d[i * k + i] = 0.0;
    return DistortionSpec(k, k, std::move(d));
}

bool DistortionSpec::has_unique_zero_structure() const {
    return std::all_of(zero_images_.begin(), zero_images_.end(),
                       [](const auto& z) { return z.size() == 1; });
}

double shannon_entropy(const Pmf& p) {
    double h = 0.0;
    for (double v : p.probs()) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

double relative_entropy(const Pmf& q, const Pmf& p) {
    if (q.size() != p.size()) {
        throw InvalidInputError("relative_entropy: mismatched alphabet sizes");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) continue;
        if (p[i] == 0.0) return kInfinity;
        kl += q[i] * std::log(q[i] / p[i]);
    }
    return std::max(kl, 0.0);
}

double renyi_half_entropy(const Pmf& p) {
    double s = 0.0;
    for (double v : p.probs()) s += std::sqrt(v);
    return 2.0 * std::log(s);
}

std::vector<TypeComposition> enumerate_types(std::size_t n, std::size_t k,
                                             std::uint64_t max_count) {
    if (n < 1 || k < 1) {
        throw InvalidInputError("enumerate_types: need n >= 1 and k >= 1");
    }
    // C(n+k-1, k-1) with overflow-safe incremental evaluation.
    double count = 1.0;
    for (std::size_t i = 1; i < k; ++i) {
        count *= static_cast<double>(n + i) / static_cast<double>(i);
        if (count > static_cast<double>(max_count) * 1.0000001) {
            throw SizeLimitError("enumerate_types: type count exceeds limit of " +
                                 std::to_string(max_count));
        }
    }

    std::vector<TypeComposition> out;
    out.reserve(static_cast<std::size_t>(count + 0.5));
    std::vector<std::size_t> counts(k, 0);
    // Recursive lexicographic enumeration of compositions.
    auto rec = [&](auto&& self, std::size_t pos, std::size_t remaining) -> void {
        if (pos + 1 == k) {
            counts[pos] = remaining;
            out.emplace_back(n, counts);
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    rec(rec, 0, n);
    return out;
}

double log_type_class_size(const TypeComposition& t) {
    double v = std::lgamma(static_cast<double>(t.n) + 1.0);
    for (std::size_t c : t.counts) {
        v -= std::lgamma(static_cast<double>(c) + 1.0);
    }
    return v;
}

double log_type_class_prob(const TypeComposition& t, const Pmf& p) {
    if (t.counts.size() != p.size()) {
        throw InvalidInputError("log_type_class_prob: mismatched alphabet sizes");
    }
    double v = log_type_class_size(t);
    for (std::size_t x = 0; x < p.size(); ++x) {
        if (t.counts[x] == 0) continue;
        if (p[x] == 0.0) return -kInfinity;
        v += static_cast<double>(t.counts[x]) * std::log(p[x]);
    }
    return std::min(v, 0.0);
}

}  // namespace authguess
