#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dfwe/error.hpp"
#include "dfwe/weight_space.hpp"

namespace dfwe {

/// Euclidean projection onto the probability simplex by sort-and-threshold:
/// find the largest support size rho with u_rho - tau(rho) > 0 for the
/// descending sort u, then clip every coordinate at tau. Exact-arithmetic
/// argmin of ||w - v||_2 over {w >= 0, sum w = 1}. Idempotent, and invariant
/// under uniform shifts v -> v + c*1.
inline std::vector<double> project_to_simplex_raw(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("cannot project an empty vector");
    for (double x : v) {
        if (!std::isfinite(x)) throw ValidationError("cannot project a vector with non-finite entries");
    }
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double tau = 0.0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double candidate_tau = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate_tau > 0.0) {
            tau = candidate_tau;
            support = j + 1;
        }
    }
    (void)support;  // support >= 1 always: the largest entry survives
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::max(v[i] - tau, 0.0);
    return w;
}

inline MixtureWeights project_to_simplex(const std::vector<double>& v) {
    return MixtureWeights(project_to_simplex_raw(v));
}

}  // namespace dfwe
