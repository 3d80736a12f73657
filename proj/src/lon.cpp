#include "msglon/lon.hpp"

#include "msglon/error.hpp"
#include "msglon/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace msglon {

BasinAssignment build_basins(const MsgInstance& instance)
{
    const std::size_t m = instance.size();
    BasinAssignment basins;
    basins.dominator.resize(m);
    basins.owner.assign(m, m);

    double best_weight = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
        const Scan s = instance.scan(instance.center(i));
        ++basins.optima.evaluations;
        const bool optimum = s.best == i && (m == 1 || s.runner_up_score < s.best_score);
        if (optimum) {
            basins.dominator[i] = i;
            basins.optima.indices.push_back(i);
            const double w = instance.component(i).weight;
            if (w > best_weight) {
                best_weight = w;
                basins.optima.global_index = i;
            }
        } else {
            // Strongest competitor at c_i: the argmax if it is not i, else the runner-up (a tie).
            basins.dominator[i] = s.best != i ? s.best : s.runner_up;
        }
    }
    if (basins.optima.indices.empty())
        throw ValidationError("build_basins: no strict local optimum (degenerate ties)");

    std::vector<std::size_t> chain;
    for (std::size_t i = 0; i < m; ++i) {
        chain.clear();
        std::size_t j = i;
        while (basins.owner[j] == m && basins.dominator[j] != j) {
            chain.push_back(j);
            j = basins.dominator[j];
            if (chain.size() > m)
                throw ValidationError("build_basins: merge chain does not terminate");
        }
        const std::size_t root = basins.owner[j] == m ? j : basins.owner[j];
        basins.owner[j] = root;
        for (std::size_t k : chain)
            basins.owner[k] = root;
    }
    return basins;
}

std::size_t assign_point(const MsgInstance& instance, const BasinAssignment& basins, std::span<const double> x)
{
    if (x.size() != instance.dim())
        throw StructuralError("assign_point: point dimension mismatch");
    return basins.owner[instance.argmax(x)];
}

void sample_ball(Rng& rng, std::span<const double> center, double radius, std::span<double> out)
{
    const std::size_t d = center.size();
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            out[k] = rng.normal();
            norm_sq += out[k] * out[k];
        }
    } while (norm_sq == 0.0);
    const double length = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::sqrt(norm_sq);
    for (std::size_t k = 0; k < d; ++k)
        out[k] = std::clamp(center[k] + length * out[k], 0.0, 1.0);
}

Lon build_lon(const MsgInstance& instance, const BasinAssignment& basins, const LonSettings& settings)
{
    const std::size_t d = instance.dim();
    const std::size_t m = instance.size();
    const std::size_t s = settings.samples != 0 ? settings.samples : 500 * d;
    const double r = settings.radius > 0.0 ? settings.radius : cell_radius(d, m);

    Lon lon;
    lon.samples = s;
    lon.radius = r;
    std::vector<std::size_t> node_of(m, m);
    for (std::size_t idx : basins.optima.indices) {
        node_of[idx] = lon.nodes.size();
        if (idx == basins.optima.global_index)
            lon.global_node = lon.nodes.size();
        const auto c = instance.center(idx);
        lon.nodes.push_back({idx, instance.component(idx).weight, {c.begin(), c.end()}});
    }

    const std::size_t n = lon.nodes.size();
    std::vector<std::vector<LonEdge>> outgoing(n);
    parallel_for(n, settings.threads, [&](std::size_t source) {
        const std::size_t component = lon.nodes[source].component;
        Rng rng = derive_stream(settings.seed, "lon-escape", component);
        std::vector<std::size_t> hits(n, 0);
        std::vector<double> x(d);
        const auto center = instance.center(component);
        for (std::size_t k = 0; k < s; ++k) {
            sample_ball(rng, center, r, x);
            ++hits[node_of[assign_point(instance, basins, x)]];
        }
        for (std::size_t target = 0; target < n; ++target) {
            if (target != source && hits[target] > 0)
                outgoing[source].push_back(
                    {source, target, static_cast<double>(hits[target]) / static_cast<double>(s), hits[target]});
        }
    });
    for (auto& list : outgoing)
        lon.edges.insert(lon.edges.end(), list.begin(), list.end());
    return lon;
}

Lon build_lon(const MsgInstance& instance, const LonSettings& settings)
{
    return build_lon(instance, build_basins(instance), settings);
}

Lon monotonic_lon(const Lon& lon)
{
    Lon result = lon;
    result.edges.clear();
    for (const auto& e : lon.edges) {
        if (lon.nodes[e.target].fitness > lon.nodes[e.source].fitness)
            result.edges.push_back(e);
    }
    result.variant = "monotonic";
    return result;
}

Lon funnel_lon(const Lon& monotonic)
{
    Lon result = monotonic;
    result.edges.clear();
    const std::size_t n = monotonic.size();
    std::vector<const LonEdge*> chosen(n, nullptr);
    for (const auto& e : monotonic.edges) {
        const LonEdge*& best = chosen[e.source];
        if (best == nullptr) {
            best = &e;
            continue;
        }
        const auto& candidate = monotonic.nodes[e.target];
        const auto& incumbent = monotonic.nodes[best->target];
        if (e.weight > best->weight
            || (e.weight == best->weight
                && (candidate.fitness > incumbent.fitness
                    || (candidate.fitness == incumbent.fitness && candidate.component < incumbent.component))))
            best = &e;
    }
    for (const auto* e : chosen) {
        if (e != nullptr)
            result.edges.push_back(*e);
    }
    result.variant = "funnel";
    return result;
}

const std::array<const char*, LonFeatures::count> LonFeatures::names = {
    "num_nodes",      "edge_density",    "num_sinks",         "avg_path_opt",
    "avg_path_sinks", "in_strength_opt", "in_strength_sinks", "global_funnel_size",
};

std::array<double, LonFeatures::count> LonFeatures::values() const
{
    return {num_nodes,      edge_density,    num_sinks,         avg_path_opt,
            avg_path_sinks, in_strength_opt, in_strength_sinks, global_funnel_size};
}

LonFeatures LonFeatures::from_values(std::span<const double> v)
{
    if (v.size() != count)
        throw StructuralError("LonFeatures: expected 8 values");
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

namespace {

// Hop distances to the nearest of `sources`, walking edges backwards. -1 = unreachable.
std::vector<long> reverse_bfs(const std::vector<std::vector<std::size_t>>& incoming,
                              const std::vector<std::size_t>& sources)
{
    std::vector<long> dist(incoming.size(), -1);
    std::deque<std::size_t> queue;
    for (std::size_t s : sources) {
        dist[s] = 0;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t u : incoming[v]) {
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

double mean_reachable(const std::vector<long>& dist)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (long h : dist) {
        if (h >= 0) {
            sum += static_cast<double>(h);
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

} // namespace

LonFeatures compute_features(const Lon& lon)
{
    const Lon mono = monotonic_lon(lon);
    const std::size_t n = mono.size();
    if (n == 0)
        throw ValidationError("compute_features: empty LON");
    const std::size_t opt = mono.global_node;

    std::vector<std::vector<std::size_t>> incoming(n);
    std::vector<std::size_t> out_degree(n, 0);
    std::vector<double> in_strength(n, 0.0);
    for (const auto& e : mono.edges) {
        incoming[e.target].push_back(e.source);
        ++out_degree[e.source];
        in_strength[e.target] += e.weight;
    }
    std::vector<std::size_t> sinks;
    for (std::size_t v = 0; v < n; ++v) {
        if (out_degree[v] == 0)
            sinks.push_back(v);
    }

    LonFeatures f;
    f.num_nodes = static_cast<double>(n);
    f.edge_density = n > 1 ? static_cast<double>(mono.edges.size()) / static_cast<double>(n * (n - 1)) : 0.0;
    f.num_sinks = static_cast<double>(sinks.size());
    f.avg_path_opt = mean_reachable(reverse_bfs(incoming, {opt}));
    f.avg_path_sinks = mean_reachable(reverse_bfs(incoming, sinks));
    f.in_strength_opt = in_strength[opt];
    double sink_strength = 0.0;
    for (std::size_t v : sinks)
        sink_strength += in_strength[v];
    f.in_strength_sinks = sinks.empty() ? 0.0 : sink_strength / static_cast<double>(sinks.size());

    const Lon funnel = funnel_lon(mono);
    std::vector<std::size_t> next(n, n);
    for (const auto& e : funnel.edges)
        next[e.source] = e.target;
    std::size_t in_global_funnel = 0;
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t u = v;
        for (std::size_t hops = 0; next[u] != n; ++hops) {
            if (hops > n)
                throw ValidationError("compute_features: funnel chain cycles");
            u = next[u];
        }
        if (u == opt)
            ++in_global_funnel;
    }
    f.global_funnel_size = static_cast<double>(in_global_funnel) / static_cast<double>(n);
    return f;
}

LonAnalysis analyze_instance(const MsgInstance& instance, const LonSettings& settings)
{
    LonAnalysis result{build_basins(instance), {}, {}};
    result.lon = build_lon(instance, result.basins, settings);
    result.features = compute_features(result.lon);
    return result;
}

} // namespace msglon
