#ifndef MSGLON_LON_HPP
#define MSGLON_LON_HPP

// Basins of attraction by region merging, escape-edge LONs and their graph features.

#include "msglon/msg.hpp"
#include "msglon/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msglon {

/// Maps every component to the local optimum its region is merged into.
///
/// A component whose center is dominated is merged into the component with the largest
/// score at that center; following these merges strictly increases f at the representative
/// center and ends at a local optimum.
struct BasinAssignment {
    std::vector<std::size_t> owner;      ///< component -> local-optimum component
    std::vector<std::size_t> dominator;  ///< component -> next hop (itself for optima)
    LocalOptimumSet optima;
};

BasinAssignment build_basins(const MsgInstance& instance);

/// Owner of the region containing x. One evaluation of f.
std::size_t assign_point(const MsgInstance& instance, const BasinAssignment& basins, std::span<const double> x);

struct LonNode {
    std::size_t component = 0; ///< index of the Gaussian whose center is the optimum
    double fitness = 0.0;
    std::vector<double> position;
};

struct LonEdge {
    std::size_t source = 0; ///< node position, not component index
    std::size_t target = 0;
    double weight = 0.0;
    std::size_t count = 0; ///< samples behind the weight (0 for hand-built graphs)
};

struct Lon {
    std::vector<LonNode> nodes;    ///< ascending component index
    std::vector<LonEdge> edges;    ///< sorted by (source, target)
    std::size_t global_node = 0;   ///< position of the best optimum in `nodes`
    std::size_t samples = 0;       ///< s
    double radius = 0.0;           ///< r
    std::string variant = "full";  ///< full | monotonic | funnel

    std::size_t size() const { return nodes.size(); }
};

struct LonSettings {
    std::size_t samples = 0; ///< per optimum; 0 selects 500 d
    double radius = 0.0;     ///< 0 selects (1/m)^(1/d)
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

/// Escape-edge LON. Each optimum draws `samples` points uniformly from the ball of radius
/// `radius` around it (clipped to the box), assigns them to basins, and gets one edge per foreign
/// basin hit, weighted by hits / samples. Optimum k uses the stream (seed, "lon-escape", k).
Lon build_lon(const MsgInstance& instance, const BasinAssignment& basins, const LonSettings& settings);
Lon build_lon(const MsgInstance& instance, const LonSettings& settings);

/// Keeps only edges to strictly fitter nodes.
Lon monotonic_lon(const Lon& lon);

/// Keeps each node's heaviest outgoing edge (ties: fitter target, then lower component index).
Lon funnel_lon(const Lon& monotonic);

/// Uniform point in the d-ball (direction from a normalized normal vector, radius r u^(1/d)),
/// clipped to [0,1]^d.
void sample_ball(Rng& rng, std::span<const double> center, double radius, std::span<double> out);

struct LonFeatures {
    double num_nodes = 0;
    double edge_density = 0;
    double num_sinks = 0;
    double avg_path_opt = 0;
    double avg_path_sinks = 0;
    double in_strength_opt = 0;
    double in_strength_sinks = 0;
    double global_funnel_size = 0;

    static constexpr std::size_t count = 8;
    static const std::array<const char*, count> names;

    std::array<double, count> values() const;
    static LonFeatures from_values(std::span<const double> values);

    bool operator==(const LonFeatures&) const = default;
};

/// Features of a LON. Everything except global_funnel_size is computed on the monotonic
/// restriction of `lon`; global_funnel_size uses the funnel LON derived from it.
///
/// Path averages count hops and include the target itself (distance 0); nodes that cannot
/// reach the optimal node are left out of avg_path_opt.
LonFeatures compute_features(const Lon& lon);

/// Convenience: basins, LON and features in one go.
struct LonAnalysis {
    BasinAssignment basins;
    Lon lon;
    LonFeatures features;
};
LonAnalysis analyze_instance(const MsgInstance& instance, const LonSettings& settings);

} // namespace msglon

#endif
