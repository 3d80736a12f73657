#include "msglon/novelty.hpp"

#include "msglon/error.hpp"
#include "msglon/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msglon {

std::string to_string(NsMode mode)
{
    switch (mode) {
    case NsMode::Random:
        return "random";
    case NsMode::Novelty:
        return "ns";
    case NsMode::NoveltyPlus:
        return "ns-plus";
    }
    return "unknown";
}

NsMode ns_mode_from_string(const std::string& name)
{
    if (name == "random")
        return NsMode::Random;
    if (name == "ns")
        return NsMode::Novelty;
    if (name == "ns-plus")
        return NsMode::NoveltyPlus;
    throw ValidationError("unknown ns mode '" + name + "' (expected random, ns or ns-plus)");
}

void validate(const NsConfig& c)
{
    if (c.dim == 0 || c.mu == 0 || c.k == 0 || c.window == 0)
        throw ValidationError("ns: dim, mu, k and window must be positive");
    if (!(c.rho_min_init > 0.0) || !(c.alpha_w >= 0.0) || !(c.alpha_sigma >= 0.0))
        throw ValidationError("ns: rho_min must be positive and mutation scales non-negative");
    if (!(c.factor_up > 0.0) || !(c.factor_down > 0.0))
        throw ValidationError("ns: threshold factors must be positive");
    if (!(c.weight_floor > 0.0 && c.weight_floor <= 1.0))
        throw ValidationError("ns: weight_floor must lie in (0,1]");
    if (c.seeded_archetypes && c.mu < 3)
        throw ValidationError("ns: NS+ needs mu >= 3 to hold the archetypes");
}

double novelty(const Phenotype& z, std::span<const Phenotype> reference, std::size_t k, std::optional<std::size_t> self)
{
    if (k == 0)
        throw ValidationError("novelty: k must be positive");
    std::vector<double> dist;
    dist.reserve(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (self && *self == i)
            continue;
        const double dx = z[0] - reference[i][0];
        const double dy = z[1] - reference[i][1];
        dist.push_back(std::sqrt(dx * dx + dy * dy));
    }
    if (dist.empty())
        return std::numeric_limits<double>::infinity();
    const std::size_t used = std::min(k, dist.size());
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(used - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(used));
    double sum = 0.0;
    for (std::size_t i = 0; i < used; ++i)
        sum += dist[i];
    return sum / static_cast<double>(used);
}

Phenotype phenotype_of(const LonFeatures& features, std::size_t m)
{
    return {features.num_nodes / static_cast<double>(m), features.global_funnel_size};
}

MsgInstance instance_of(const NsConfig& config, std::span<const double> centers, const Solution& solution)
{
    return make_instance(config.dim, centers, {solution.genotype.weights, solution.genotype.sigmas},
                         solution.lon_seed, solution.origin);
}

LonAnalysis evaluate_genotype(const NsConfig& config, std::span<const double> centers, const Genotype& genotype,
                              std::uint64_t lon_seed)
{
    const MsgInstance instance = make_instance(config.dim, centers, {genotype.weights, genotype.sigmas}, lon_seed, "ns");
    LonSettings settings;
    settings.samples = config.lon_samples;
    settings.radius = config.lon_radius;
    settings.seed = lon_seed;
    return analyze_instance(instance, settings);
}

void clip_genotype(Genotype& genotype, const NsConfig& config)
{
    const double lo = config.sigma_lo();
    const double hi = config.sigma_hi();
    for (auto& w : genotype.weights)
        w = std::clamp(w, config.weight_floor, 1.0);
    for (auto& s : genotype.sigmas)
        s = std::clamp(s, lo, hi);
}

Genotype random_genotype(const NsConfig& config, Rng& rng)
{
    const std::size_t m = config.m();
    Genotype g{std::vector<double>(m), std::vector<double>(m)};
    for (auto& w : g.weights)
        w = rng.uniform_open_closed();
    for (auto& s : g.sigmas)
        s = rng.uniform(config.sigma_lo(), config.sigma_hi());
    return g;
}

double adapt_threshold(double threshold, std::size_t additions, const NsConfig& config)
{
    if (additions > config.window_hi)
        return threshold * config.factor_up;
    if (additions == 0)
        return threshold * config.factor_down;
    return threshold;
}

NoveltySearch::NoveltySearch(NsConfig config)
    : config_(std::move(config)), threshold_(config_.rho_min_init)
{
    validate(config_);
    const std::size_t m = config_.m();
    centers_ = sample_centers(config_.dim, m, config_.seed);

    all_.resize(config_.mu);
    for (std::size_t i = 0; i < config_.mu; ++i) {
        Rng rng = derive_stream(config_.seed, "ns-init", i);
        all_[i].id = i;
        all_[i].origin = "random";
        all_[i].genotype = random_genotype(config_, rng);
        all_[i].lon_seed = stream_key(config_.seed, "ns-lon", i);
    }
    if (config_.seeded_archetypes) {
        const Archetype kinds[] = {Archetype::UniModal, Archetype::UniSink, Archetype::MultiSink};
        for (std::size_t i = 0; i < 3; ++i) {
            const auto p = archetype_parameters(kinds[i], config_.dim, centers_,
                                                stream_key(config_.seed, "ns-archetype", i));
            all_[i].genotype = {p.weights, p.sigmas};
            all_[i].origin = "archetype:" + to_string(kinds[i]);
        }
    }
    evaluate(all_);
    parents_.resize(config_.mu);
    std::iota(parents_.begin(), parents_.end(), std::size_t{0});
    archive_ = parents_;
}

void NoveltySearch::evaluate(std::span<Solution> batch)
{
    const std::size_t m = config_.m();
    parallel_for(batch.size(), config_.threads, [&](std::size_t i) {
        Solution& s = batch[i];
        s.features = evaluate_genotype(config_, centers_, s.genotype, s.lon_seed).features;
        s.phenotype = phenotype_of(s.features, m);
    });
}

void NoveltySearch::step()
{
    const std::size_t generation = ++generation_;
    const std::size_t first_id = all_.size();

    std::vector<Solution> offspring(config_.lambda);
    Rng rng = derive_stream(config_.seed, "ns-reproduce", generation);
    for (std::size_t i = 0; i < config_.lambda; ++i) {
        const std::size_t parent = parents_[rng.below(parents_.size())];
        Solution& child = offspring[i];
        child.id = first_id + i;
        child.generation = generation;
        child.parent = parent;
        child.origin = "offspring";
        child.genotype = all_[parent].genotype;
        for (auto& w : child.genotype.weights)
            w += config_.alpha_w * rng.normal();
        for (auto& s : child.genotype.sigmas)
            s += config_.alpha_sigma * rng.normal();
        clip_genotype(child.genotype, config_);
        child.lon_seed = stream_key(config_.seed, "ns-lon", child.id);
    }
    evaluate(offspring);
    for (auto& child : offspring)
        all_.push_back(std::move(child));

    // Z_{mu+lambda}: parents first, then offspring.
    std::vector<std::size_t> pool = parents_;
    for (std::size_t i = 0; i < config_.lambda; ++i)
        pool.push_back(first_id + i);

    // Z' = Z_archive U Z_{mu+lambda}, each solution once.
    std::vector<std::size_t> position(all_.size(), all_.size());
    std::vector<Phenotype> reference;
    auto add = [&](std::size_t id) {
        if (position[id] == all_.size()) {
            position[id] = reference.size();
            reference.push_back(all_[id].phenotype);
        }
    };
    for (std::size_t id : archive_)
        add(id);
    for (std::size_t id : pool)
        add(id);

    std::vector<double> score(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        score[i] = novelty(all_[pool[i]].phenotype, reference, config_.k, position[pool[i]]);

    for (std::size_t i = parents_.size(); i < pool.size(); ++i) {
        if (score[i] > threshold_) {
            archive_.push_back(pool[i]);
            insertions_.push_back({pool[i], generation, score[i], threshold_});
            ++window_additions_;
        }
    }

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    parents_.clear();
    for (std::size_t i = 0; i < config_.mu && i < order.size(); ++i)
        parents_.push_back(pool[order[i]]);

    if (generation % config_.window == 0) {
        threshold_ = adapt_threshold(threshold_, window_additions_, config_);
        window_additions_ = 0;
    }
    threshold_trace_.push_back(threshold_);
}

void NoveltySearch::run()
{
    while (generation_ < config_.t_max)
        step();
}

std::vector<Solution> ns_run(const NsConfig& config)
{
    NoveltySearch search(config);
    search.run();
    return search.all_solutions();
}

std::vector<Solution> random_baseline(const NsConfig& config)
{
    validate(config);
    const std::size_t total = config.mu + config.t_max * config.lambda;
    const auto centers = sample_centers(config.dim, config.m(), config.seed);
    std::vector<Solution> solutions(total);
    parallel_for(total, config.threads, [&](std::size_t i) {
        Rng rng = derive_stream(config.seed, "random-baseline", i);
        Solution& s = solutions[i];
        s.id = i;
        s.origin = "random";
        s.genotype = random_genotype(config, rng);
        s.lon_seed = stream_key(config.seed, "ns-lon", i);
        s.features = evaluate_genotype(config, centers, s.genotype, s.lon_seed).features;
        s.phenotype = phenotype_of(s.features, config.m());
    });
    return solutions;
}

std::vector<Solution> generate_corpus(NsMode mode, NsConfig config)
{
    switch (mode) {
    case NsMode::Random:
        return random_baseline(config);
    case NsMode::Novelty:
        config.seeded_archetypes = false;
        return ns_run(config);
    case NsMode::NoveltyPlus:
        config.seeded_archetypes = true;
        return ns_run(config);
    }
    throw ValidationError("unknown ns mode");
}

} // namespace msglon
