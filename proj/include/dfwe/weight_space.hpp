#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "dfwe/checkpoint.hpp"
#include "dfwe/error.hpp"

namespace dfwe {

/// A point on the probability simplex: nonnegative entries summing to 1
/// within kSumTolerance. Validated on construction, immutable afterwards.
class MixtureWeights {
public:
    static constexpr double kSumTolerance = 1e-12;

    explicit MixtureWeights(std::vector<double> alphas) : alphas_(std::move(alphas)) {
        if (alphas_.empty()) throw ValidationError("mixture weights must be nonempty");
        double sum = 0.0;
        for (double a : alphas_) {
            if (!(a >= 0.0)) {  // also rejects NaN
                throw ValidationError("mixture weight " + std::to_string(a) + " is negative or non-finite");
            }
            sum += a;
        }
        if (std::abs(sum - 1.0) > kSumTolerance) {
            throw ValidationError("mixture weights sum to " + std::to_string(sum) + ", expected 1");
        }
    }

    static MixtureWeights one_hot(std::size_t size, std::size_t index) {
        if (index >= size) throw ValidationError("one-hot index out of range");
        std::vector<double> a(size, 0.0);
        a[index] = 1.0;
        return MixtureWeights(std::move(a));
    }

    static MixtureWeights uniform(std::size_t size) {
        if (size == 0) throw ValidationError("mixture weights must be nonempty");
        return MixtureWeights(std::vector<double>(size, 1.0 / static_cast<double>(size)));
    }

    const std::vector<double>& alphas() const { return alphas_; }
    std::size_t size() const { return alphas_.size(); }
    double operator[](std::size_t i) const { return alphas_[i]; }

private:
    std::vector<double> alphas_;
};

inline std::string format_alphas(const MixtureWeights& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", a[i]);
        s += buf;
    }
    return s;
}

/// Convex combination of the set's parameters: out[j] = sum_i alpha_i * theta_i[j],
/// accumulated in ascending member order in 64-bit precision, rounded to f32
/// at the end. With one-hot weights this reproduces the selected member
/// exactly. Meta records the member labels and weights used.
inline Checkpoint interpolate(const CheckpointSet& theta, const MixtureWeights& a) {
    if (a.size() != theta.members.size()) {
        throw ValidationError("got " + std::to_string(a.size()) + " weights for " +
                              std::to_string(theta.members.size()) + " members");
    }
    const std::size_t m = theta.members.size();
    Checkpoint out;
    for (const auto& [name, first] : theta.members[0].tensors) {
        TensorEntry entry;
        entry.name = name;
        entry.shape = first.shape;
        entry.data.resize(first.data.size());
        std::vector<const float*> sources(m);
        for (std::size_t i = 0; i < m; ++i) sources[i] = theta.members[i].tensor(name).data.data();
        for (std::size_t j = 0; j < entry.data.size(); ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                acc += a[i] * static_cast<double>(sources[i][j]);
            }
            entry.data[j] = static_cast<float>(acc);
        }
        out.add_tensor(std::move(entry));
    }
    std::string labels;
    for (std::size_t i = 0; i < theta.labels.size(); ++i) {
        if (i) labels += ",";
        labels += theta.labels[i];
    }
    out.meta["mixture.members"] = labels;
    out.meta["mixture.alphas"] = format_alphas(a);
    return out;
}

/// Global L2 distance over all concatenated parameters of two compatible
/// checkpoints.
inline double pairwise_distance(const Checkpoint& c1, const Checkpoint& c2) {
    detail::check_member_compatible(c1, c2, 1);
    double sum_sq = 0.0;
    for (const auto& [name, t1] : c1.tensors) {
        const TensorEntry& t2 = c2.tensor(name);
        for (std::size_t j = 0; j < t1.data.size(); ++j) {
            const double d = static_cast<double>(t1.data[j]) - static_cast<double>(t2.data[j]);
            sum_sq += d * d;
        }
    }
    return std::sqrt(sum_sq);
}

}  // namespace dfwe
