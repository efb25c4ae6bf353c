#pragma once

#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dfwe/checkpoint.hpp"
#include "dfwe/error.hpp"
#include "dfwe/nelder_mead.hpp"
#include "dfwe/simplex.hpp"
#include "dfwe/weight_space.hpp"

namespace dfwe {

/// Search aborted because the dev evaluator failed. Carries the optimizer
/// trace accumulated up to the failing evaluation.
class MixtureSearchAborted : public Error {
public:
    MixtureSearchAborted(const std::string& message, OptimizationTrace trace)
        : Error(message), trace_(std::move(trace)) {}
    const OptimizationTrace& trace() const { return trace_; }

private:
    OptimizationTrace trace_;
};

/// Starting simplex for an m-member mixture search: the uniform point plus m
/// near-vertex points (1-eps on one coordinate, eps/(m-1) elsewhere). All m+1
/// points lie on the probability simplex, so their affine rank is m-1; the
/// missing direction is the uniform shift that projection absorbs anyway.
/// Starting here guarantees the search result is never worse on dev than the
/// uniform soup or any near-vertex mixture.
inline std::vector<std::vector<double>> initial_simplex_for_ensemble(std::size_t member_count) {
    if (member_count < 2) {
        throw ValidationError("mixture search needs at least 2 members, got " + std::to_string(member_count));
    }
    constexpr double eps = 0.05;
    const std::size_t m = member_count;
    std::vector<std::vector<double>> points;
    points.reserve(m + 1);
    points.emplace_back(m, 1.0 / static_cast<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> p(m, eps / static_cast<double>(m - 1));
        p[i] = 1.0 - eps;
        points.push_back(std::move(p));
    }
    return points;
}

struct MixtureSearchResult {
    MixtureWeights best_weights;
    double best_dev_score;
    OptimizationTrace trace;
};

namespace detail {

/// Memoization key: the projected point rounded to 12 decimal digits.
/// Distinct ambient points that project to the same weights share one entry.
inline std::string mixture_memo_key(const MixtureWeights& w) {
    std::string key;
    key.reserve(w.size() * 15);
    char buf[24];
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12f", w[i]);
        if (i) key += ',';
        key += buf;
    }
    return key;
}

}  // namespace detail

/// Finds mixture weights maximizing dev_eval(interpolate(theta, A)) by
/// Nelder-Mead over the ambient weight space, projecting every candidate
/// onto the probability simplex before evaluation. dev_eval must be
/// deterministic for a fixed checkpoint; repeated candidates are served from
/// a memo keyed on the projected point.
inline MixtureSearchResult optimize_mixture(const CheckpointSet& theta,
                                            const std::function<double(const Checkpoint&)>& dev_eval,
                                            const NelderMeadConfig& config) {
    std::map<std::string, double> memo;
    OptimizationTrace live_trace;

    auto objective = [&](const std::vector<double>& x) -> double {
        const MixtureWeights weights = project_to_simplex(x);
        std::string key = detail::mixture_memo_key(weights);
        if (auto it = memo.find(key); it != memo.end()) return -it->second;
        double score;
        try {
            score = dev_eval(interpolate(theta, weights));
        } catch (const std::exception& e) {
            throw MixtureSearchAborted(std::string("dev evaluator failed: ") + e.what(), live_trace);
        }
        memo.emplace(std::move(key), score);
        return -score;  // the optimizer minimizes
    };

    NelderMeadConfig nm_config = config;
    nm_config.allow_rank_deficient_simplex = true;  // points live on the simplex hyperplane

    const NelderMeadResult result =
        nelder_mead(objective, initial_simplex_for_ensemble(theta.members.size()), nm_config, &live_trace);

    return MixtureSearchResult{project_to_simplex(result.best_point), -result.best_value, result.trace};
}

}  // namespace dfwe
