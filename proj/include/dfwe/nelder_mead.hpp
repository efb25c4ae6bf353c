#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfwe/error.hpp"

namespace dfwe {

enum class NmMove { reflect, expand, contract_outside, contract_inside, shrink };
enum class NmTermination { budget, f_converged, x_converged };

inline const char* to_string(NmMove m) {
    switch (m) {
        case NmMove::reflect: return "reflect";
        case NmMove::expand: return "expand";
        case NmMove::contract_outside: return "contract-outside";
        case NmMove::contract_inside: return "contract-inside";
        case NmMove::shrink: return "shrink";
    }
    return "?";
}

inline const char* to_string(NmTermination t) {
    switch (t) {
        case NmTermination::budget: return "budget";
        case NmTermination::f_converged: return "f-converged";
        case NmTermination::x_converged: return "x-converged";
    }
    return "?";
}

struct NelderMeadConfig {
    /// Dimension-adaptive coefficient schedule: reflection 1, expansion
    /// 1 + 2/d, contraction 0.75 - 1/(2d), shrink 1 - 1/d. When false the
    /// four explicit values below are used (classical defaults).
    bool adaptive_coefficients = true;
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;

    int max_iterations = 40;
    double f_spread_tolerance = 1e-8;
    double x_spread_tolerance = 1e-8;

    /// Accept an initial simplex whose affine rank is exactly d-1. Meant for
    /// objectives that are invariant along one direction, e.g. when every
    /// candidate is projected onto the probability simplex before evaluation.
    bool allow_rank_deficient_simplex = false;
};

struct NmCoefficients {
    double reflection;
    double expansion;
    double contraction;
    double shrink;
};

/// Coefficients actually used for a given dimension. The adaptive formulas
/// degenerate below d=2 (shrink would hit 0), so d=1 falls back to the
/// classical values.
inline NmCoefficients resolve_coefficients(const NelderMeadConfig& cfg, std::size_t dim) {
    NmCoefficients c{cfg.reflection, cfg.expansion, cfg.contraction, cfg.shrink};
    if (cfg.adaptive_coefficients && dim >= 2) {
        const double d = static_cast<double>(dim);
        c = NmCoefficients{1.0, 1.0 + 2.0 / d, 0.75 - 1.0 / (2.0 * d), 1.0 - 1.0 / d};
    }
    if (!(c.reflection > 0.0)) throw ConfigError("Nelder-Mead reflection coefficient must be > 0");
    if (!(c.expansion > std::max(1.0, c.reflection))) {
        throw ConfigError("Nelder-Mead expansion coefficient must exceed max(1, reflection)");
    }
    if (!(c.contraction > 0.0 && c.contraction < 1.0)) {
        throw ConfigError("Nelder-Mead contraction coefficient must be in (0, 1)");
    }
    if (!(c.shrink > 0.0 && c.shrink < 1.0)) {
        throw ConfigError("Nelder-Mead shrink coefficient must be in (0, 1)");
    }
    return c;
}

struct NmTraceRecord {
    int iteration;      // 1-based main-loop pass
    double best;        // best objective value after the move
    double worst;       // worst objective value after the move
    NmMove move;
    int evals_so_far;   // objective calls up to and including this move
};

struct OptimizationTrace {
    std::vector<NmTraceRecord> records;
    int total_evaluations = 0;
    NmTermination termination = NmTermination::budget;

    /// One JSON object per iteration, line-delimited.
    std::string to_jsonl() const {
        std::string out;
        for (const auto& r : records) {
            nlohmann::ordered_json j;
            j["iter"] = r.iteration;
            j["best"] = r.best;
            j["worst"] = r.worst;
            j["move"] = to_string(r.move);
            j["evals_so_far"] = r.evals_so_far;
            out += j.dump();
            out += "\n";
        }
        return out;
    }
};

struct NelderMeadResult {
    std::vector<double> best_point;
    double best_value = std::numeric_limits<double>::infinity();
    OptimizationTrace trace;
};

namespace detail {

/// Affine rank of a simplex: rank of the difference matrix {x_i - x_0},
/// computed by Gaussian elimination with partial pivoting.
inline std::size_t simplex_affine_rank(const std::vector<std::vector<double>>& points) {
    const std::size_t rows = points.size() - 1;
    const std::size_t cols = points[0].size();
    std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
    double scale = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            m[i][j] = points[i + 1][j] - points[0][j];
            scale = std::max(scale, std::abs(m[i][j]));
        }
    }
    if (scale == 0.0) return 0;
    const double tol = 1e-12 * scale;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (std::abs(m[i][col]) > std::abs(m[pivot][col])) pivot = i;
        }
        if (std::abs(m[pivot][col]) <= tol) continue;
        std::swap(m[rank], m[pivot]);
        for (std::size_t i = rank + 1; i < rows; ++i) {
            const double f = m[i][col] / m[rank][col];
            for (std::size_t j = col; j < cols; ++j) m[i][j] -= f * m[rank][j];
        }
        ++rank;
    }
    return rank;
}

}  // namespace detail

/// Derivative-free minimization with the downhill simplex method: reflect,
/// expand, contract (outside/inside) and shrink moves over d+1 vertices.
/// One iteration is one pass of the main loop (one ordering plus one move).
/// Stops at max_iterations, when the objective spread across the simplex
/// drops below f_spread_tolerance, or when the largest vertex distance drops
/// below x_spread_tolerance. Non-finite objective values are treated as +inf,
/// so the search never crashes on evaluator faults and the best vertex is
/// never displaced by one. Vertex ordering breaks ties by insertion index,
/// which makes the whole run deterministic.
///
/// When `live_trace` is given, records are appended there as the run
/// progresses, so the caller keeps the partial trace even if the objective
/// throws mid-run.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                                    const std::vector<std::vector<double>>& initial_simplex,
                                    const NelderMeadConfig& config,
                                    OptimizationTrace* live_trace = nullptr) {
    if (config.max_iterations < 1) throw ConfigError("max_iterations must be positive");
    if (config.f_spread_tolerance < 0 || config.x_spread_tolerance < 0) {
        throw ConfigError("Nelder-Mead tolerances must be nonnegative");
    }
    if (initial_simplex.size() < 2) throw ValidationError("initial simplex needs at least 2 points");
    const std::size_t dim = initial_simplex[0].size();
    if (initial_simplex.size() != dim + 1) {
        throw ValidationError("initial simplex must have d+1 points for dimension d; got " +
                              std::to_string(initial_simplex.size()) + " points in dimension " +
                              std::to_string(dim));
    }
    for (const auto& p : initial_simplex) {
        if (p.size() != dim) throw ValidationError("initial simplex points differ in dimension");
        for (double v : p) {
            if (!std::isfinite(v)) throw ValidationError("initial simplex contains a non-finite coordinate");
        }
    }
    const std::size_t rank = detail::simplex_affine_rank(initial_simplex);
    const std::size_t required = config.allow_rank_deficient_simplex ? dim - 1 : dim;
    if (rank < required) {
        throw ValidationError("degenerate initial simplex: affine rank " + std::to_string(rank) +
                              ", need " + std::to_string(required));
    }

    const NmCoefficients coef = resolve_coefficients(config, dim);

    OptimizationTrace local_trace;
    OptimizationTrace& trace = live_trace ? *live_trace : local_trace;
    trace = OptimizationTrace{};

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    struct Vertex {
        std::vector<double> x;
        double f;
        std::uint64_t birth;
    };
    std::uint64_t birth_counter = 0;
    std::vector<Vertex> vertices;
    vertices.reserve(dim + 1);
    for (const auto& p : initial_simplex) {
        vertices.push_back(Vertex{p, eval(p), birth_counter++});
    }

    auto order = [&]() {
        std::stable_sort(vertices.begin(), vertices.end(), [](const Vertex& a, const Vertex& b) {
            if (a.f != b.f) return a.f < b.f;
            return a.birth < b.birth;
        });
    };

    auto record_move = [&](int iteration, NmMove move) {
        double best = vertices[0].f, worst = vertices[0].f;
        for (const auto& v : vertices) {
            best = std::min(best, v.f);
            worst = std::max(worst, v.f);
        }
        trace.records.push_back(NmTraceRecord{iteration, best, worst, move, evals});
    };

    trace.termination = NmTermination::budget;
    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        order();
        const double f_best = vertices.front().f;
        const double f_worst = vertices.back().f;
        if (f_worst - f_best < config.f_spread_tolerance) {
            trace.termination = NmTermination::f_converged;
            break;
        }
        double x_spread = 0.0;
        for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
            for (std::size_t j = i + 1; j < vertices.size(); ++j) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    const double d = vertices[i].x[k] - vertices[j].x[k];
                    d2 += d * d;
                }
                x_spread = std::max(x_spread, std::sqrt(d2));
            }
        }
        if (x_spread < config.x_spread_tolerance) {
            trace.termination = NmTermination::x_converged;
            break;
        }

        // Centroid of all vertices except the worst.
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += vertices[i].x[k];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        const Vertex& worst = vertices.back();
        std::vector<double> direction(dim);
        for (std::size_t k = 0; k < dim; ++k) direction[k] = centroid[k] - worst.x[k];

        auto point_at = [&](double step) {
            std::vector<double> p(dim);
            for (std::size_t k = 0; k < dim; ++k) p[k] = centroid[k] + step * direction[k];
            return p;
        };
        auto replace_worst = [&](std::vector<double> x, double f) {
            vertices.back() = Vertex{std::move(x), f, birth_counter++};
        };

        std::vector<double> reflected = point_at(coef.reflection);
        const double f_reflected = eval(reflected);
        const double f_second_worst = vertices[vertices.size() - 2].f;

        NmMove move;
        if (f_reflected < f_best) {
            std::vector<double> expanded = point_at(coef.expansion);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                replace_worst(std::move(expanded), f_expanded);
                move = NmMove::expand;
            } else {
                replace_worst(std::move(reflected), f_reflected);
                move = NmMove::reflect;
            }
        } else if (f_reflected < f_second_worst) {
            replace_worst(std::move(reflected), f_reflected);
            move = NmMove::reflect;
        } else {
            bool shrink = false;
            if (f_reflected < worst.f) {
                std::vector<double> contracted = point_at(coef.reflection * coef.contraction);
                const double f_contracted = eval(contracted);
                if (f_contracted <= f_reflected) {
                    replace_worst(std::move(contracted), f_contracted);
                    move = NmMove::contract_outside;
                } else {
                    shrink = true;
                }
            } else {
                std::vector<double> contracted = point_at(-coef.contraction);
                const double f_contracted = eval(contracted);
                if (f_contracted < worst.f) {
                    replace_worst(std::move(contracted), f_contracted);
                    move = NmMove::contract_inside;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                const std::vector<double> anchor = vertices.front().x;
                for (std::size_t i = 1; i < vertices.size(); ++i) {
                    for (std::size_t k = 0; k < dim; ++k) {
                        vertices[i].x[k] = anchor[k] + coef.shrink * (vertices[i].x[k] - anchor[k]);
                    }
                    vertices[i].f = eval(vertices[i].x);
                    vertices[i].birth = birth_counter++;
                }
                move = NmMove::shrink;
            }
        }
        record_move(iteration, move);
    }

    order();
    trace.total_evaluations = evals;
    NelderMeadResult result;
    result.best_point = vertices.front().x;
    result.best_value = vertices.front().f;
    result.trace = trace;
    return result;
}

}  // namespace dfwe
