#ifndef MSGLON_TESTS_ORACLES_HPP
#define MSGLON_TESTS_ORACLES_HPP

// Independent re-implementations used as test oracles. They work on the raw component list
// with direct exp() evaluation and share no code path with the library internals.

#include "msglon/msg.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <algorithm>
#include <vector>

namespace oracle {

inline double gaussian(const msglon::GaussianComponent& g, const std::vector<double>& x)
{
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
        sq += (x[k] - g.center[k]) * (x[k] - g.center[k]);
    return g.weight * std::exp(-sq / (2.0 * g.sigma * g.sigma));
}

struct Value {
    double value;
    std::size_t index;
};

inline Value naive_evaluate(const msglon::MsgInstance& inst, const std::vector<double>& x)
{
    Value best{-1.0, 0};
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const double v = gaussian(inst.component(i), x);
        if (v > best.value)
            best = {v, i};
    }
    return best;
}

inline bool is_local_optimum(const msglon::MsgInstance& inst, std::size_t i)
{
    const auto& ci = inst.component(i).center;
    const double own = gaussian(inst.component(i), ci);
    for (std::size_t j = 0; j < inst.size(); ++j) {
        if (j != i && gaussian(inst.component(j), ci) >= own)
            return false;
    }
    return true;
}

/// Recursive merge rule: a dominated region joins its strongest dominator's basin.
inline std::size_t merge_owner(const msglon::MsgInstance& inst, std::size_t i, std::size_t depth = 0)
{
    if (depth > inst.size())
        throw std::runtime_error("merge chain cycles");
    if (is_local_optimum(inst, i))
        return i;
    const auto& ci = inst.component(i).center;
    std::size_t best = i;
    double best_value = -1.0;
    for (std::size_t j = 0; j < inst.size(); ++j) {
        if (j == i)
            continue;
        const double v = gaussian(inst.component(j), ci);
        if (v > best_value) {
            best_value = v;
            best = j;
        }
    }
    return merge_owner(inst, best, depth + 1);
}

inline std::size_t assign(const msglon::MsgInstance& inst, const std::vector<double>& x)
{
    return merge_owner(inst, naive_evaluate(inst, x).index);
}

/// Coordinate steepest ascent as a pattern search: the step starts at 1e-7, doubles after an
/// improving move (up to 1e-2) and halves otherwise, stopping below 1e-12. The tiny first step
/// keeps it inside narrow basins around strict optima.
inline std::vector<double> hill_climb(const msglon::MsgInstance& inst, std::vector<double> x)
{
    const std::size_t d = x.size();
    double step = 1e-7;
    double fx = naive_evaluate(inst, x).value;
    while (step > 1e-12) {
        double best = fx;
        std::vector<double> best_x;
        for (std::size_t k = 0; k < d; ++k) {
            for (double dir : {-1.0, 1.0}) {
                std::vector<double> y = x;
                y[k] = std::clamp(y[k] + dir * step, 0.0, 1.0);
                const double fy = naive_evaluate(inst, y).value;
                if (fy > best) {
                    best = fy;
                    best_x = y;
                }
            }
        }
        if (best_x.empty()) {
            step *= 0.5;
        } else {
            x = best_x;
            fx = best;
            step = std::min(2.0 * step, 1e-2);
        }
    }
    return x;
}

/// Index of the center within tol of x, if any.
inline std::optional<std::size_t> center_at(const msglon::MsgInstance& inst, const std::vector<double>& x,
                                            double tol)
{
    for (std::size_t i = 0; i < inst.size(); ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
            sq += (x[k] - inst.component(i).center[k]) * (x[k] - inst.component(i).center[k]);
        if (std::sqrt(sq) < tol)
            return i;
    }
    return std::nullopt;
}

/// Basin fractions of the clipped ball around `center`, integrated on a uniform grid (d = 2).
inline std::map<std::size_t, double> ball_fractions_2d(const msglon::MsgInstance& inst,
                                                       const std::vector<double>& center, double radius,
                                                       std::size_t per_axis)
{
    std::map<std::size_t, double> hits;
    std::size_t inside = 0;
    const double h = 2.0 * radius / static_cast<double>(per_axis);
    for (std::size_t a = 0; a < per_axis; ++a) {
        for (std::size_t b = 0; b < per_axis; ++b) {
            const double dx = -radius + (static_cast<double>(a) + 0.5) * h;
            const double dy = -radius + (static_cast<double>(b) + 0.5) * h;
            if (dx * dx + dy * dy > radius * radius)
                continue;
            const std::vector<double> x = {std::clamp(center[0] + dx, 0.0, 1.0), std::clamp(center[1] + dy, 0.0, 1.0)};
            ++hits[assign(inst, x)];
            ++inside;
        }
    }
    std::map<std::size_t, double> fractions;
    for (const auto& [owner, count] : hits)
        fractions[owner] = static_cast<double>(count) / static_cast<double>(inside);
    return fractions;
}

} // namespace oracle

#endif
