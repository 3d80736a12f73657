#ifndef MSGLON_GD_ORACLE_HPP
#define MSGLON_GD_ORACLE_HPP

// Capped-step gradient ascent as an independent basin oracle.

#include "msglon/lon.hpp"
#include "msglon/msg.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace msglon {

struct GdConfig {
    double eta = 0.01;
    std::size_t max_steps = 2000;
    std::size_t starts_per_dim = 5000;
    double move_tolerance = 1e-12;
    /// An unconverged endpoint farther than this from every center falls back to the nearest
    /// local optimum.
    double proximity_tolerance = 1e-3;
    std::size_t threads = 1;
};

void validate(const GdConfig& config);

struct GdResult {
    std::size_t optimum = 0;     ///< component index of the local optimum reached
    std::size_t steps = 0;
    bool converged = false;      ///< last move shorter than move_tolerance
    bool fallback = false;       ///< nearest-optimum fallback used
    std::size_t f_decreases = 0; ///< steps where f went down
    std::vector<double> endpoint;
};

/// x <- clip(x + min(eta g_k(x) / sigma_k^2, 1) (c_k - x)) with k the argmax at x, until the
/// move is below tolerance or max_steps are spent. The endpoint is mapped through the region
/// owner rule.
GdResult gd_converge(const MsgInstance& instance, const BasinAssignment& basins, std::span<const double> start,
                     const GdConfig& config);

struct DifferenceReport {
    double rate = 0.0;
    std::size_t starts = 0;
    std::size_t disagreements = 0;
    std::size_t fallbacks = 0;
    std::size_t unconverged = 0;
    std::size_t f_decreases = 0;
    /// Per-start flags (1 = disagreement), in Sobol' order. Filled only when requested.
    std::vector<unsigned char> mismatch;
    std::vector<std::size_t> gd_owner;
    std::vector<std::size_t> region_owner;
};

/// Fraction of Sobol' starts (starts_per_dim d of them, origin included) whose gradient-ascent
/// basin differs from the region-merge basin.
DifferenceReport difference_rate(const MsgInstance& instance, const BasinAssignment& basins,
                                 const GdConfig& config, bool keep_assignments = false);
DifferenceReport difference_rate(const MsgInstance& instance, const GdConfig& config);

} // namespace msglon

#endif
