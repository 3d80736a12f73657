#ifndef MSGLON_MSG_HPP
#define MSGLON_MSG_HPP

// Max-Set-of-Gaussians landscapes on [0,1]^d.
//
// f(x) = max_i g_i(x), g_i(x) = w_i exp(-|x - c_i|^2 / (2 sigma_i^2)), maximized.
//
// The argmax is resolved on log-scores log w_i - |x - c_i|^2 / (2 sigma_i^2), which order the
// components exactly like g_i but avoid an exp() per component. All dominance decisions in the
// library (local optima, basin merges, point assignment) go through the same scores so they are
// mutually consistent.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msglon {

struct GaussianComponent {
    std::vector<double> center;
    double weight = 1.0;
    double sigma = 1.0;
};

/// Side length of the m cells that tile [0,1]^d: (1/m)^(1/d).
double cell_radius(std::size_t dim, std::size_t count);
inline double sigma_min(std::size_t dim, std::size_t count) { return cell_radius(dim, count) / 4.0; }
inline double sigma_max(std::size_t dim, std::size_t count) { return 3.0 * cell_radius(dim, count); }

/// Default number of components for a dimension: 50 d.
inline std::size_t default_component_count(std::size_t dim) { return 50 * dim; }

struct Evaluation {
    double value = 0.0;
    std::size_t index = 0;
};

/// Result of one full pass over the components at a point.
struct Scan {
    std::size_t best = 0;
    double best_score = 0.0;
    std::size_t runner_up = 0; ///< argmax over components other than `best`; equals best when m == 1
    double runner_up_score = 0.0;
};

/// One landscape. Immutable after construction and safe to share between threads.
class MsgInstance {
public:
    /// Validates and takes ownership. Throws StructuralError on inconsistent dimensions and
    /// ValidationError on weights outside (0,1], non-positive sigmas, centers outside [0,1]^d
    /// or duplicated centers.
    MsgInstance(std::size_t dim, std::vector<GaussianComponent> components, std::uint64_t seed = 0,
                std::string generator = "manual");

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return components_.size(); }
    std::uint64_t seed() const { return seed_; }
    const std::string& generator() const { return generator_; }
    const std::vector<GaussianComponent>& components() const { return components_; }
    const GaussianComponent& component(std::size_t i) const { return components_[i]; }
    std::span<const double> center(std::size_t i) const { return {&centers_[i * dim_], dim_}; }

    /// log g_i(x).
    double log_score(std::size_t i, std::span<const double> x) const;
    /// g_i(x).
    double gaussian(std::size_t i, std::span<const double> x) const;

    /// Argmax and runner-up over all components. Ties go to the lowest index.
    Scan scan(std::span<const double> x) const;
    /// Argmax only, through the candidate index. Same result as argmax_exhaustive.
    std::size_t argmax(std::span<const double> x) const;
    std::size_t argmax_exhaustive(std::span<const double> x) const;

    /// Cells per axis of the candidate index.
    std::size_t index_resolution() const { return cells_per_axis_; }

private:
    std::size_t dim_;
    std::vector<GaussianComponent> components_;
    std::vector<double> centers_;       // m x d, row-major
    std::vector<double> log_weights_;   // log w_i
    std::vector<double> neg_inv_2var_;  // -1 / (2 sigma_i^2)

    // Uniform grid over [0,1]^d. Each cell lists the components that can be the argmax
    // somewhere inside it, ordered by decreasing weight so a scan can stop once log w_i falls
    // below the best score found.
    void build_index();
    std::size_t cells_per_axis_ = 1;
    std::vector<std::uint32_t> cell_offsets_;
    std::vector<std::uint32_t> cell_members_;
    std::uint64_t seed_;
    std::string generator_;
};

/// f(x) and the attaining component. Throws StructuralError when x has the wrong dimension.
Evaluation evaluate(const MsgInstance& instance, std::span<const double> x);

struct LocalOptimumSet {
    std::vector<std::size_t> indices; ///< ascending component indices
    std::size_t global_index = 0;     ///< component index of the best optimum
    std::size_t evaluations = 0;      ///< f-evaluations spent (one per center)
};

/// Centers not dominated at themselves: g_i(c_i) > g_j(c_i) for every j != i.
LocalOptimumSet enumerate_local_optima(const MsgInstance& instance);

/// First m points of the d-dimensional Sobol' sequence, origin included, flattened (m x d).
/// The sequence is unscrambled, so the seed does not change the output; it is accepted so the
/// call signature matches the other generators.
std::vector<double> sample_centers(std::size_t dim, std::size_t count, std::uint64_t seed = 0);

enum class Archetype { UniModal, UniSink, MultiSink };

std::string to_string(Archetype kind);
Archetype archetype_from_string(const std::string& name);

/// Weights and sigmas for a hand-designed landscape over the given centers (m x d, flattened).
///
/// UniModal: the main peak has w = 1 and sigma_max; every other w_j equals the main peak's
/// value at c_j (rounded down so the main peak strictly dominates) with sigma_min.
/// UniSink: the main peak has w = 1; other weights fall linearly with distance, reaching 0.1
/// at the farthest center; all sigma_min.
/// MultiSink: w_i = 1 + 0.01 eps_i, eps_i ~ N(0,1), normalized by the maximum; all sigma_min.
///
/// The main peak is the center nearest to the middle of the box (lowest index on ties).
struct Parameters {
    std::vector<double> weights;
    std::vector<double> sigmas;
};
Parameters archetype_parameters(Archetype kind, std::size_t dim, std::span<const double> centers,
                                std::uint64_t noise_seed);

/// Uniform parameters: w ~ U(0,1], sigma ~ U[sigma_min, sigma_max].
Parameters random_parameters(std::size_t dim, std::size_t count, std::uint64_t seed);

/// Assembles an instance from flattened centers and per-component parameters.
MsgInstance make_instance(std::size_t dim, std::span<const double> centers, const Parameters& params,
                          std::uint64_t seed, std::string generator);

/// Archetype over Sobol' centers.
MsgInstance make_archetype(Archetype kind, std::size_t dim, std::size_t count, std::uint64_t noise_seed);

/// Random instance over Sobol' centers.
MsgInstance make_random_instance(std::size_t dim, std::size_t count, std::uint64_t seed);

} // namespace msglon

#endif
