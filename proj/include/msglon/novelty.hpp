#ifndef MSGLON_NOVELTY_HPP
#define MSGLON_NOVELTY_HPP

// (mu+lambda) novelty search over MSG weights and sigmas.

#include "msglon/lon.hpp"
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

/// (num_nodes / m, global_funnel_size).
using Phenotype = std::array<double, 2>;

struct Genotype {
    std::vector<double> weights;
    std::vector<double> sigmas;
};

enum class NsMode { Random, Novelty, NoveltyPlus };
std::string to_string(NsMode mode);
NsMode ns_mode_from_string(const std::string& name);

struct NsConfig {
    std::size_t dim = 2;
    std::size_t components = 0; ///< m; 0 selects 50 d
    std::size_t mu = 20;
    std::size_t lambda = 100;
    std::size_t t_max = 100;
    std::size_t k = 15;
    double rho_min_init = 0.05;
    double alpha_w = 0.1;
    double alpha_sigma = 0.05;
    std::size_t window = 4;
    std::size_t window_hi = 30;
    double factor_up = 1.05;
    double factor_down = 0.95;
    double weight_floor = 1e-6; ///< mutation clips weights to [weight_floor, 1]
    std::uint64_t seed = 0;
    bool seeded_archetypes = false; ///< NS+
    std::size_t lon_samples = 0;    ///< 0 selects 500 d
    double lon_radius = 0.0;        ///< 0 selects (1/m)^(1/d)
    std::size_t threads = 1;

    std::size_t m() const { return components != 0 ? components : default_component_count(dim); }
    double sigma_lo() const { return sigma_min(dim, m()); }
    double sigma_hi() const { return sigma_max(dim, m()); }
};

void validate(const NsConfig& config);

struct Solution {
    std::size_t id = 0;
    std::size_t generation = 0;
    std::optional<std::size_t> parent;
    std::string origin; ///< "random", "offspring" or "archetype:<kind>"
    Genotype genotype;
    std::uint64_t lon_seed = 0;
    LonFeatures features;
    Phenotype phenotype{};
};

/// Mean Euclidean distance to the k nearest entries of `reference`, skipping reference[*self].
/// Fewer than k candidates: mean over all of them. No candidates: +infinity.
double novelty(const Phenotype& z, std::span<const Phenotype> reference, std::size_t k,
               std::optional<std::size_t> self = std::nullopt);

/// Builds the instance for a genotype over fixed centers, its LON and features.
LonAnalysis evaluate_genotype(const NsConfig& config, std::span<const double> centers, const Genotype& genotype,
                              std::uint64_t lon_seed);
Phenotype phenotype_of(const LonFeatures& features, std::size_t m);

/// Clips weights to [weight_floor, 1] and sigmas to [sigma_min, sigma_max].
void clip_genotype(Genotype& genotype, const NsConfig& config);
Genotype random_genotype(const NsConfig& config, Rng& rng);

/// Threshold after a completed window with `additions` archive insertions.
double adapt_threshold(double threshold, std::size_t additions, const NsConfig& config);

struct ArchiveInsertion {
    std::size_t id = 0;
    std::size_t generation = 0;
    double novelty = 0.0;
    double threshold = 0.0;
};

/// Search state. Step by step so tests can inspect every generation.
class NoveltySearch {
public:
    explicit NoveltySearch(NsConfig config);

    /// One generation: reproduce, score against archive + parents + offspring, archive,
    /// select, adapt the threshold at window boundaries.
    void step();
    void run();

    const NsConfig& config() const { return config_; }
    const std::vector<double>& centers() const { return centers_; }
    const std::vector<Solution>& all_solutions() const { return all_; }
    const std::vector<std::size_t>& parents() const { return parents_; }
    const std::vector<std::size_t>& archive() const { return archive_; }
    const std::vector<ArchiveInsertion>& insertions() const { return insertions_; }
    const std::vector<double>& threshold_trace() const { return threshold_trace_; }
    double threshold() const { return threshold_; }
    std::size_t generation() const { return generation_; }
    std::size_t window_additions() const { return window_additions_; }

private:
    void evaluate(std::span<Solution> batch);

    NsConfig config_;
    std::vector<double> centers_;
    std::vector<Solution> all_;           // Z_all, indexed by id
    std::vector<std::size_t> parents_;    // Z_mu (ids)
    std::vector<std::size_t> archive_;    // Z_archive (ids)
    std::vector<ArchiveInsertion> insertions_;
    std::vector<double> threshold_trace_; // threshold in force after each generation
    double threshold_;
    std::size_t generation_ = 0;
    std::size_t window_additions_ = 0;
};

/// Z_all of a full run: mu + t_max lambda solutions ordered by id.
std::vector<Solution> ns_run(const NsConfig& config);

/// Same number of solutions as ns_run, each sampled uniformly within the bounds.
std::vector<Solution> random_baseline(const NsConfig& config);

/// Runs the requested mode.
std::vector<Solution> generate_corpus(NsMode mode, NsConfig config);

MsgInstance instance_of(const NsConfig& config, std::span<const double> centers, const Solution& solution);

} // namespace msglon

#endif
