#include "msglon/msg.hpp"

#include "msglon/error.hpp"
#include "msglon/rng.hpp"
#include "msglon/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msglon {

double cell_radius(std::size_t dim, std::size_t count)
{
    if (dim == 0 || count == 0)
        throw StructuralError("cell_radius: dimension and count must be positive");
    return std::pow(1.0 / static_cast<double>(count), 1.0 / static_cast<double>(dim));
}

MsgInstance::MsgInstance(std::size_t dim, std::vector<GaussianComponent> components, std::uint64_t seed,
                         std::string generator)
    : dim_(dim), components_(std::move(components)), seed_(seed), generator_(std::move(generator))
{
    if (dim_ == 0)
        throw StructuralError("instance: dimension must be positive");
    if (components_.empty())
        throw ValidationError("instance: at least one component required");

    const std::size_t m = components_.size();
    centers_.reserve(m * dim_);
    log_weights_.reserve(m);
    neg_inv_2var_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& g = components_[i];
        if (g.center.size() != dim_)
            throw StructuralError("instance: component " + std::to_string(i) + " has center of dimension "
                                  + std::to_string(g.center.size()) + ", expected " + std::to_string(dim_));
        if (!(g.weight > 0.0 && g.weight <= 1.0))
            throw ValidationError("instance: component " + std::to_string(i) + " weight outside (0,1]");
        if (!(g.sigma > 0.0) || !std::isfinite(g.sigma))
            throw ValidationError("instance: component " + std::to_string(i) + " sigma must be positive");
        for (double v : g.center) {
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("instance: component " + std::to_string(i) + " center outside [0,1]^d");
        }
        centers_.insert(centers_.end(), g.center.begin(), g.center.end());
        log_weights_.push_back(std::log(g.weight));
        neg_inv_2var_.push_back(-0.5 / (g.sigma * g.sigma));
    }

    // Sort a copy of the centers lexicographically so duplicates end up adjacent.
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i)
        order[i] = i;
    auto row = [&](std::size_t i) { return centers_.begin() + static_cast<std::ptrdiff_t>(i * dim_); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(row(a), row(a) + dim_, row(b), row(b) + dim_);
    });
    for (std::size_t k = 1; k < m; ++k) {
        if (std::equal(row(order[k - 1]), row(order[k - 1]) + dim_, row(order[k])))
            throw ValidationError("instance: components " + std::to_string(order[k - 1]) + " and "
                                  + std::to_string(order[k]) + " share a center");
    }
    build_index();
}

void MsgInstance::build_index()
{
    constexpr std::size_t max_cells = 1024;
    const std::size_t m = components_.size();
    const std::size_t d = dim_;
    std::size_t per_axis = 1;
    while (std::pow(static_cast<double>(per_axis + 1), static_cast<double>(d)) <= static_cast<double>(max_cells))
        ++per_axis;
    cells_per_axis_ = per_axis;
    std::size_t cells = 1;
    for (std::size_t k = 0; k < d; ++k)
        cells *= per_axis;

    std::vector<std::size_t> by_weight(m);
    for (std::size_t i = 0; i < m; ++i)
        by_weight[i] = i;
    std::stable_sort(by_weight.begin(), by_weight.end(),
                     [&](std::size_t a, std::size_t b) { return log_weights_[a] > log_weights_[b]; });

    const double width = 1.0 / static_cast<double>(per_axis);
    std::vector<double> lo(d), hi(d), upper(m);
    std::vector<std::size_t> coord(d, 0);
    cell_offsets_.assign(cells + 1, 0);
    cell_members_.clear();
    for (std::size_t cell = 0; cell < cells; ++cell) {
        for (std::size_t k = 0; k < d; ++k) {
            lo[k] = static_cast<double>(coord[k]) * width;
            hi[k] = coord[k] + 1 == per_axis ? 1.0 : static_cast<double>(coord[k] + 1) * width;
        }
        // Best guaranteed score in the cell and every component's best possible score there.
        double floor_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double* c = &centers_[i * d];
            double near_sq = 0.0, far_sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double below = lo[k] - c[k];
                const double above = c[k] - hi[k];
                const double gap = std::max({below, above, 0.0});
                const double reach = std::max(std::abs(c[k] - lo[k]), std::abs(c[k] - hi[k]));
                near_sq += gap * gap;
                far_sq += reach * reach;
            }
            upper[i] = log_weights_[i] + neg_inv_2var_[i] * near_sq;
            floor_score = std::max(floor_score, log_weights_[i] + neg_inv_2var_[i] * far_sq);
        }
        const double cutoff = floor_score - 1e-9 * (1.0 + std::abs(floor_score));
        for (std::size_t i : by_weight) {
            if (upper[i] >= cutoff)
                cell_members_.push_back(static_cast<std::uint32_t>(i));
        }
        cell_offsets_[cell + 1] = static_cast<std::uint32_t>(cell_members_.size());

        for (std::size_t k = 0; k < d; ++k) {
            if (++coord[k] < per_axis)
                break;
            coord[k] = 0;
        }
    }
}

double MsgInstance::log_score(std::size_t i, std::span<const double> x) const
{
    const double* c = &centers_[i * dim_];
    double sq = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
        const double diff = x[k] - c[k];
        sq += diff * diff;
    }
    return log_weights_[i] + neg_inv_2var_[i] * sq;
}

double MsgInstance::gaussian(std::size_t i, std::span<const double> x) const
{
    return std::exp(log_score(i, x));
}

Scan MsgInstance::scan(std::span<const double> x) const
{
    const std::size_t m = components_.size();
    Scan result;
    result.best_score = log_score(0, x);
    result.runner_up_score = -std::numeric_limits<double>::infinity();
    bool has_runner_up = false;
    for (std::size_t i = 1; i < m; ++i) {
        const double score = log_score(i, x);
        if (score > result.best_score) {
            result.runner_up = result.best;
            result.runner_up_score = result.best_score;
            result.best = i;
            result.best_score = score;
            has_runner_up = true;
        } else if (!has_runner_up || score > result.runner_up_score) {
            result.runner_up = i;
            result.runner_up_score = score;
            has_runner_up = true;
        }
    }
    if (!has_runner_up) {
        result.runner_up = result.best;
        result.runner_up_score = -std::numeric_limits<double>::infinity();
    }
    return result;
}

std::size_t MsgInstance::argmax(std::span<const double> x) const
{
    const std::size_t d = dim_;
    std::size_t cell = 0, stride = 1;
    for (std::size_t k = 0; k < d; ++k) {
        const double v = x[k];
        if (!(v >= 0.0 && v <= 1.0))
            return argmax_exhaustive(x); // the index only covers the box
        const auto c = std::min(static_cast<std::size_t>(v * static_cast<double>(cells_per_axis_)), cells_per_axis_ - 1);
        cell += c * stride;
        stride *= cells_per_axis_;
    }
    const std::uint32_t* it = cell_members_.data() + cell_offsets_[cell];
    const std::uint32_t* end = cell_members_.data() + cell_offsets_[cell + 1];
    std::size_t best = *it;
    double best_score = log_score(best, x);
    for (++it; it != end; ++it) {
        const std::size_t i = *it;
        if (log_weights_[i] < best_score)
            break;
        double sq = 0.0;
        const double* c = &centers_[i * d];
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = x[k] - c[k];
            sq += diff * diff;
        }
        const double score = log_weights_[i] + neg_inv_2var_[i] * sq;
        if (score > best_score || (score == best_score && i < best)) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

std::size_t MsgInstance::argmax_exhaustive(std::span<const double> x) const
{
    const std::size_t m = components_.size();
    const std::size_t d = dim_;
    const double* c = centers_.data();
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i, c += d) {
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = x[k] - c[k];
            sq += diff * diff;
        }
        const double score = log_weights_[i] + neg_inv_2var_[i] * sq;
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

Evaluation evaluate(const MsgInstance& instance, std::span<const double> x)
{
    if (x.size() != instance.dim())
        throw StructuralError("evaluate: point has dimension " + std::to_string(x.size()) + ", instance has "
                              + std::to_string(instance.dim()));
    const std::size_t k = instance.argmax(x);
    return {instance.gaussian(k, x), k};
}

LocalOptimumSet enumerate_local_optima(const MsgInstance& instance)
{
    LocalOptimumSet result;
    const std::size_t m = instance.size();
    double best_weight = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
        const Scan s = instance.scan(instance.center(i));
        ++result.evaluations;
        const bool strict = s.best == i && (m == 1 || s.runner_up_score < s.best_score);
        if (!strict)
            continue;
        result.indices.push_back(i);
        // f(c_i) = w_i for an optimum.
        const double w = instance.component(i).weight;
        if (w > best_weight) {
            best_weight = w;
            result.global_index = i;
        }
    }
    // A strict global maximum of the weights always survives, so the set is never empty
    // unless every center ties with a neighbour.
    if (result.indices.empty())
        throw ValidationError("enumerate_local_optima: no strict local optimum (degenerate ties)");
    return result;
}

std::vector<double> sample_centers(std::size_t dim, std::size_t count, std::uint64_t /*seed*/)
{
    if (count == 0)
        throw StructuralError("sample_centers: count must be positive");
    return sobol_points(dim, count);
}

std::string to_string(Archetype kind)
{
    switch (kind) {
    case Archetype::UniModal:
        return "unimodal";
    case Archetype::UniSink:
        return "unisink";
    case Archetype::MultiSink:
        return "multisink";
    }
    return "unknown";
}

Archetype archetype_from_string(const std::string& name)
{
    if (name == "unimodal")
        return Archetype::UniModal;
    if (name == "unisink")
        return Archetype::UniSink;
    if (name == "multisink")
        return Archetype::MultiSink;
    throw ValidationError("unknown archetype '" + name + "'");
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        sq += (a[k] - b[k]) * (a[k] - b[k]);
    return sq;
}

std::size_t central_index(std::size_t dim, std::span<const double> centers)
{
    const std::size_t m = centers.size() / dim;
    const std::vector<double> middle(dim, 0.5);
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        const double sq = squared_distance(centers.subspan(i * dim, dim), middle);
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return best;
}

} // namespace

Parameters archetype_parameters(Archetype kind, std::size_t dim, std::span<const double> centers,
                                std::uint64_t noise_seed)
{
    if (dim == 0 || centers.empty() || centers.size() % dim != 0)
        throw StructuralError("archetype: centers do not match dimension");
    const std::size_t m = centers.size() / dim;
    const double lo = sigma_min(dim, m);
    const double hi = sigma_max(dim, m);
    Parameters p{std::vector<double>(m, 1.0), std::vector<double>(m, lo)};
    const std::size_t peak = central_index(dim, centers);
    auto center = [&](std::size_t i) { return centers.subspan(i * dim, dim); };

    switch (kind) {
    case Archetype::UniModal: {
        p.sigmas[peak] = hi;
        const double neg_inv_2var = -0.5 / (hi * hi);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == peak)
                continue;
            const double score = neg_inv_2var * squared_distance(center(j), center(peak));
            double w = std::exp(score);
            while (w > 0.0 && std::log(w) >= score)
                w = std::nextafter(w, 0.0);
            p.weights[j] = std::max(w, std::numeric_limits<double>::min());
        }
        break;
    }
    case Archetype::UniSink: {
        double far = 0.0;
        std::vector<double> dist(m);
        for (std::size_t j = 0; j < m; ++j) {
            dist[j] = std::sqrt(squared_distance(center(j), center(peak)));
            far = std::max(far, dist[j]);
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (j != peak)
                p.weights[j] = far > 0.0 ? 1.0 - 0.9 * dist[j] / far : 1.0;
        }
        break;
    }
    case Archetype::MultiSink: {
        Rng rng = derive_stream(noise_seed, "archetype-multisink");
        double top = 0.0;
        for (auto& w : p.weights) {
            w = 1.0 + 0.01 * rng.normal();
            top = std::max(top, w);
        }
        for (auto& w : p.weights)
            w /= top;
        break;
    }
    }
    return p;
}

Parameters random_parameters(std::size_t dim, std::size_t count, std::uint64_t seed)
{
    const double lo = sigma_min(dim, count);
    const double hi = sigma_max(dim, count);
    Rng rng = derive_stream(seed, "random-parameters");
    Parameters p{std::vector<double>(count), std::vector<double>(count)};
    for (std::size_t i = 0; i < count; ++i)
        p.weights[i] = rng.uniform_open_closed();
    for (std::size_t i = 0; i < count; ++i)
        p.sigmas[i] = rng.uniform(lo, hi);
    return p;
}

MsgInstance make_instance(std::size_t dim, std::span<const double> centers, const Parameters& params,
                          std::uint64_t seed, std::string generator)
{
    if (dim == 0 || centers.size() % dim != 0)
        throw StructuralError("make_instance: centers do not match dimension");
    const std::size_t m = centers.size() / dim;
    if (params.weights.size() != m || params.sigmas.size() != m)
        throw StructuralError("make_instance: parameter count does not match centers");
    std::vector<GaussianComponent> components(m);
    for (std::size_t i = 0; i < m; ++i) {
        components[i].center.assign(centers.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                    centers.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
        components[i].weight = params.weights[i];
        components[i].sigma = params.sigmas[i];
    }
    return MsgInstance(dim, std::move(components), seed, std::move(generator));
}

MsgInstance make_archetype(Archetype kind, std::size_t dim, std::size_t count, std::uint64_t noise_seed)
{
    const auto centers = sample_centers(dim, count);
    return make_instance(dim, centers, archetype_parameters(kind, dim, centers, noise_seed), noise_seed,
                         to_string(kind));
}

MsgInstance make_random_instance(std::size_t dim, std::size_t count, std::uint64_t seed)
{
    const auto centers = sample_centers(dim, count);
    return make_instance(dim, centers, random_parameters(dim, count, seed), seed, "random");
}

} // namespace msglon
