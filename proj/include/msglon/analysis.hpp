#ifndef MSGLON_ANALYSIS_HPP
#define MSGLON_ANALYSIS_HPP

// Feature-space coverage, rank correlation and the regression dataset.

#include "msglon/lon.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msglon {

/// 30 x 30 occupancy over (num_nodes mapped from [1, m] to [0, 1], global_funnel_size).
struct CoverageGrid {
    static constexpr std::size_t bins = 30;
    std::array<std::size_t, bins * bins> counts{};
    std::size_t instances = 0;
    double coverage = 0.0;

    std::size_t& at(std::size_t node_bin, std::size_t funnel_bin) { return counts[node_bin * bins + funnel_bin]; }
    std::size_t at(std::size_t node_bin, std::size_t funnel_bin) const { return counts[node_bin * bins + funnel_bin]; }
};

/// Cell of a (normalized) value in [0, 1]; 1.0 falls in the last cell.
std::size_t coverage_bin(double unit_value);
/// (num_nodes - 1) / (m - 1), or 0 when m == 1.
double normalized_nodes(double num_nodes, std::size_t m);

struct FeaturePoint {
    double num_nodes = 0;
    double global_funnel_size = 0;
};
CoverageGrid coverage(std::span<const FeaturePoint> points, std::size_t m);

/// Spearman's rho with average ranks for ties. nullopt when either side has no rank variance.
/// Throws StructuralError for unequal lengths or fewer than two points.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

/// 1-based ranks, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// One row of the regression dataset: one instance under one algorithm.
struct DatasetRecord {
    std::string instance_id;
    std::size_t dim = 0;
    std::size_t components = 0;
    std::string mode;
    std::uint64_t seed = 0;
    std::size_t generation = 0;
    std::string algorithm;
    LonFeatures features;
    std::optional<double> success_rate;
    std::optional<double> conv_time;

    bool operator==(const DatasetRecord&) const = default;
};

/// Header of the exported dataset, in column order.
const std::vector<std::string>& dataset_columns();

std::string dataset_to_csv(std::span<const DatasetRecord> records);
std::vector<DatasetRecord> dataset_from_csv(const std::string& text);

struct CorpusEntry {
    std::string instance_id;
    std::size_t dim = 0;
    std::size_t components = 0;
    std::string mode;
    std::uint64_t seed = 0;
    std::size_t generation = 0;
    LonFeatures features;
};

struct PerformanceRow {
    std::string instance_id;
    std::string algorithm;
    double success_rate = 0;
    double conv_time = 0;
};

struct ExportResult {
    std::vector<DatasetRecord> records;
    std::size_t missing = 0; ///< rows emitted without performance values
};

/// One record per (instance, algorithm). Algorithms are those present in `performance`
/// (sorted); instance order follows `corpus`.
ExportResult export_dataset(std::span<const CorpusEntry> corpus, std::span<const PerformanceRow> performance);

struct CorrelationEntry {
    std::string feature;
    std::string metric;
    std::string algorithm;
    std::size_t dim = 0;
    std::optional<double> rho;
    std::size_t samples = 0;
};

/// Spearman rho for every feature x {success_rate, conv_time}, grouped by algorithm and d.
/// Records without performance values are skipped; undefined correlations stay as nullopt.
std::vector<CorrelationEntry> correlation_table(std::span<const DatasetRecord> records);

struct HeatmapCell {
    std::size_t node_bin = 0;
    std::size_t funnel_bin = 0;
    std::string algorithm;
    std::size_t instances = 0;
    double median_success = 0;
};
std::vector<HeatmapCell> success_heatmap(std::span<const DatasetRecord> records);

double median(std::vector<double> values);

} // namespace msglon

#endif
