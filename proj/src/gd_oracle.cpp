#include "msglon/gd_oracle.hpp"

#include "msglon/error.hpp"
#include "msglon/parallel.hpp"
#include "msglon/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msglon {

void validate(const GdConfig& config)
{
    if (!(config.eta > 0.0))
        throw ValidationError("gd: eta must be positive");
    if (config.max_steps < 1)
        throw ValidationError("gd: max_steps must be at least 1");
    if (config.starts_per_dim < 1)
        throw ValidationError("gd: starts_per_dim must be at least 1");
    if (!(config.move_tolerance >= 0.0) || !(config.proximity_tolerance >= 0.0))
        throw ValidationError("gd: tolerances must be non-negative");
}

namespace {

// Components that can reach the score of `k` somewhere on the segment from x to c_k.
//
// While k stays the argmax every iterate lies on that segment, so only these candidates need
// to be compared per step. Along p(t) = x + t (c_k - x) each log-score is a quadratic in t and
// the difference to k's score is checked at both ends and at its vertex.
void segment_candidates(const MsgInstance& instance, std::size_t k, std::span<const double> x,
                        std::vector<std::size_t>& out)
{
    constexpr double margin = 1e-9;
    out.clear();
    const std::size_t d = instance.dim();
    const auto ck = instance.center(k);
    double vv = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        vv += (ck[j] - x[j]) * (ck[j] - x[j]);
    const double score_k_start = instance.log_score(k, x);
    const double ak = -0.5 / (instance.component(k).sigma * instance.component(k).sigma);

    for (std::size_t i = 0; i < instance.size(); ++i) {
        if (i == k)
            continue;
        const auto ci = instance.center(i);
        const double ai = -0.5 / (instance.component(i).sigma * instance.component(i).sigma);
        double uv = 0.0; // (x - c_i) . (c_k - x)
        for (std::size_t j = 0; j < d; ++j)
            uv += (x[j] - ci[j]) * (ck[j] - x[j]);
        // score_i(p(t)) = score_i(x) + ai (2 t uv + t^2 vv)
        // score_k(p(t)) = log w_k + ak (1 - t)^2 vv
        const double score_i_start = instance.log_score(i, x);
        const double quad = (ai - ak) * vv;
        const double lin = 2.0 * ai * uv + 2.0 * ak * vv;
        const double constant = score_i_start - score_k_start;
        double best = std::max(constant, constant + lin + quad);
        if (quad < 0.0) {
            const double t = -lin / (2.0 * quad);
            if (t > 0.0 && t < 1.0)
                best = std::max(best, constant + lin * t + quad * t * t);
        }
        if (best > -margin * (1.0 + std::abs(score_k_start)))
            out.push_back(i);
    }
}

} // namespace

GdResult gd_converge(const MsgInstance& instance, const BasinAssignment& basins, std::span<const double> start,
                     const GdConfig& config)
{
    const std::size_t d = instance.dim();
    if (start.size() != d)
        throw StructuralError("gd_converge: start dimension mismatch");

    GdResult result;
    std::vector<double> x(start.begin(), start.end());
    std::vector<double> next(d);
    std::vector<std::size_t> candidates;
    const double tol_sq = config.move_tolerance * config.move_tolerance;

    std::size_t k = instance.argmax(x);
    double score = instance.log_score(k, x);
    double fx = std::exp(score);
    segment_candidates(instance, k, x, candidates);
    while (result.steps < config.max_steps) {
        const auto& g = instance.component(k);
        const double factor = std::min(config.eta * fx / (g.sigma * g.sigma), 1.0);
        const auto c = instance.center(k);
        double move_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            next[j] = factor == 1.0 ? c[j] : std::clamp(x[j] + factor * (c[j] - x[j]), 0.0, 1.0);
            const double delta = next[j] - x[j];
            move_sq += delta * delta;
        }
        x.swap(next);
        ++result.steps;

        // Argmax over k and its candidates, lowest index on ties.
        std::size_t best = k;
        double best_score = instance.log_score(k, x);
        for (std::size_t i : candidates) {
            const double s = instance.log_score(i, x);
            if (s > best_score || (s == best_score && i < best)) {
                best = i;
                best_score = s;
            }
        }
        if (best != k) {
            k = best;
            segment_candidates(instance, k, x, candidates);
        }
        const double fnext = std::exp(best_score);
        if (fnext < fx)
            ++result.f_decreases;
        fx = fnext;
        if (move_sq <= tol_sq) {
            result.converged = true;
            break;
        }
    }

    result.optimum = basins.owner[k];
    if (!result.converged) {
        double nearest_sq = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < instance.size(); ++i) {
            const auto c = instance.center(i);
            double sq = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                sq += (x[j] - c[j]) * (x[j] - c[j]);
            nearest_sq = std::min(nearest_sq, sq);
        }
        if (nearest_sq > config.proximity_tolerance * config.proximity_tolerance) {
            result.fallback = true;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t idx : basins.optima.indices) {
                const auto c = instance.center(idx);
                double sq = 0.0;
                for (std::size_t j = 0; j < d; ++j)
                    sq += (x[j] - c[j]) * (x[j] - c[j]);
                if (sq < best) {
                    best = sq;
                    result.optimum = idx;
                }
            }
        }
    }
    result.endpoint = std::move(x);
    return result;
}

DifferenceReport difference_rate(const MsgInstance& instance, const BasinAssignment& basins,
                                 const GdConfig& config, bool keep_assignments)
{
    validate(config);
    const std::size_t d = instance.dim();
    const std::size_t n = config.starts_per_dim * d;
    const auto starts = sobol_points(d, n);

    std::vector<std::size_t> gd_owner(n), region_owner(n);
    std::vector<unsigned char> fallback(n), unconverged(n);
    std::vector<std::size_t> decreases(n);
    constexpr std::size_t chunk = 256;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    parallel_for(chunks, config.threads, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            const std::span<const double> x0(&starts[i * d], d);
            const GdResult r = gd_converge(instance, basins, x0, config);
            gd_owner[i] = r.optimum;
            region_owner[i] = assign_point(instance, basins, x0);
            fallback[i] = r.fallback;
            unconverged[i] = !r.converged;
            decreases[i] = r.f_decreases;
        }
    });

    DifferenceReport report;
    report.starts = n;
    if (keep_assignments)
        report.mismatch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool differs = gd_owner[i] != region_owner[i];
        report.disagreements += differs;
        report.fallbacks += fallback[i];
        report.unconverged += unconverged[i];
        report.f_decreases += decreases[i];
        if (keep_assignments)
            report.mismatch[i] = differs;
    }
    report.rate = n == 0 ? 0.0 : static_cast<double>(report.disagreements) / static_cast<double>(n);
    if (keep_assignments) {
        report.gd_owner = std::move(gd_owner);
        report.region_owner = std::move(region_owner);
    }
    return report;
}

DifferenceReport difference_rate(const MsgInstance& instance, const GdConfig& config)
{
    return difference_rate(instance, build_basins(instance), config);
}

} // namespace msglon
