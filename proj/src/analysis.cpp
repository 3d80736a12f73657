#include "msglon/analysis.hpp"

#include "msglon/error.hpp"
#include "msglon/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace msglon {

std::size_t coverage_bin(double unit_value)
{
    const double v = std::clamp(unit_value, 0.0, 1.0);
    return std::min(static_cast<std::size_t>(v * CoverageGrid::bins), CoverageGrid::bins - 1);
}

double normalized_nodes(double num_nodes, std::size_t m)
{
    if (m <= 1)
        return 0.0;
    return (num_nodes - 1.0) / static_cast<double>(m - 1);
}

CoverageGrid coverage(std::span<const FeaturePoint> points, std::size_t m)
{
    CoverageGrid grid;
    for (const auto& p : points)
        ++grid.at(coverage_bin(normalized_nodes(p.num_nodes, m)), coverage_bin(p.global_funnel_size));
    grid.instances = points.size();
    const auto occupied = std::count_if(grid.counts.begin(), grid.counts.end(), [](std::size_t c) { return c > 0; });
    grid.coverage = static_cast<double>(occupied) / static_cast<double>(grid.counts.size());
    return grid;
}

std::vector<double> average_ranks(std::span<const double> values)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]])
            ++j;
        // positions i..j-1 share ranks i+1..j
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size())
        throw StructuralError("spearman: inputs differ in length");
    if (xs.size() < 2)
        throw StructuralError("spearman: need at least two points");
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double a = rx[i] - mean;
        const double b = ry[i] - mean;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0)
        return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const std::vector<std::string>& dataset_columns()
{
    static const std::vector<std::string> columns = [] {
        std::vector<std::string> c = {"instance_id", "d", "m", "mode", "seed", "generation", "algorithm"};
        for (const char* name : LonFeatures::names)
            c.emplace_back(name);
        c.emplace_back("success_rate");
        c.emplace_back("conv_time");
        return c;
    }();
    return columns;
}

namespace {

std::string optional_cell(const std::optional<double>& v)
{
    return v ? format_double(*v) : std::string();
}

double parse_double(const std::string& cell, const char* what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size())
            throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string("csv: bad number in column ") + what + ": '" + cell + "'");
    }
}

std::uint64_t parse_unsigned(const std::string& cell, const char* what)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(cell, &used);
        if (used != cell.size())
            throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string("csv: bad integer in column ") + what + ": '" + cell + "'");
    }
}

} // namespace

std::string dataset_to_csv(std::span<const DatasetRecord> records)
{
    CsvTable table;
    table.header = dataset_columns();
    for (const auto& r : records) {
        std::vector<std::string> row = {r.instance_id,
                                        std::to_string(r.dim),
                                        std::to_string(r.components),
                                        r.mode,
                                        std::to_string(r.seed),
                                        std::to_string(r.generation),
                                        r.algorithm};
        for (double v : r.features.values())
            row.push_back(format_double(v));
        row.push_back(optional_cell(r.success_rate));
        row.push_back(optional_cell(r.conv_time));
        table.rows.push_back(std::move(row));
    }
    return to_csv(table);
}

std::vector<DatasetRecord> dataset_from_csv(const std::string& text)
{
    const CsvTable table = parse_csv(text);
    if (table.header != dataset_columns())
        throw ValidationError("dataset: unexpected header");
    std::vector<DatasetRecord> records;
    for (const auto& row : table.rows) {
        DatasetRecord r;
        r.instance_id = row[0];
        r.dim = parse_unsigned(row[1], "d");
        r.components = parse_unsigned(row[2], "m");
        r.mode = row[3];
        r.seed = parse_unsigned(row[4], "seed");
        r.generation = parse_unsigned(row[5], "generation");
        r.algorithm = row[6];
        std::array<double, LonFeatures::count> values{};
        for (std::size_t i = 0; i < LonFeatures::count; ++i)
            values[i] = parse_double(row[7 + i], LonFeatures::names[i]);
        r.features = LonFeatures::from_values(values);
        if (!row[15].empty())
            r.success_rate = parse_double(row[15], "success_rate");
        if (!row[16].empty())
            r.conv_time = parse_double(row[16], "conv_time");
        records.push_back(std::move(r));
    }
    return records;
}

ExportResult export_dataset(std::span<const CorpusEntry> corpus, std::span<const PerformanceRow> performance)
{
    std::set<std::string> algorithms;
    std::map<std::pair<std::string, std::string>, const PerformanceRow*> lookup;
    for (const auto& p : performance) {
        algorithms.insert(p.algorithm);
        lookup[{p.instance_id, p.algorithm}] = &p;
    }
    ExportResult result;
    for (const auto& entry : corpus) {
        for (const auto& algorithm : algorithms) {
            DatasetRecord r;
            r.instance_id = entry.instance_id;
            r.dim = entry.dim;
            r.components = entry.components;
            r.mode = entry.mode;
            r.seed = entry.seed;
            r.generation = entry.generation;
            r.algorithm = algorithm;
            r.features = entry.features;
            auto it = lookup.find({entry.instance_id, algorithm});
            if (it != lookup.end()) {
                r.success_rate = it->second->success_rate;
                r.conv_time = it->second->conv_time;
            } else {
                ++result.missing;
            }
            result.records.push_back(std::move(r));
        }
    }
    return result;
}

std::vector<CorrelationEntry> correlation_table(std::span<const DatasetRecord> records)
{
    std::map<std::pair<std::string, std::size_t>, std::vector<const DatasetRecord*>> groups;
    for (const auto& r : records) {
        if (r.success_rate && r.conv_time)
            groups[{r.algorithm, r.dim}].push_back(&r);
    }
    std::vector<CorrelationEntry> table;
    for (const auto& [key, rows] : groups) {
        std::vector<double> success, conv;
        for (const auto* r : rows) {
            success.push_back(*r->success_rate);
            conv.push_back(*r->conv_time);
        }
        for (std::size_t f = 0; f < LonFeatures::count; ++f) {
            std::vector<double> feature;
            for (const auto* r : rows)
                feature.push_back(r->features.values()[f]);
            for (const auto& [metric, ys] : {std::pair{"success_rate", &success}, std::pair{"conv_time", &conv}}) {
                CorrelationEntry e{LonFeatures::names[f], metric, key.first, key.second, std::nullopt, rows.size()};
                if (rows.size() >= 2)
                    e.rho = spearman(feature, *ys);
                table.push_back(std::move(e));
            }
        }
    }
    return table;
}

double median(std::vector<double> values)
{
    if (values.empty())
        return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<HeatmapCell> success_heatmap(std::span<const DatasetRecord> records)
{
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<double>> cells;
    for (const auto& r : records) {
        if (!r.success_rate)
            continue;
        const std::size_t nb = coverage_bin(normalized_nodes(r.features.num_nodes, r.components));
        const std::size_t fb = coverage_bin(r.features.global_funnel_size);
        cells[{r.algorithm, nb, fb}].push_back(*r.success_rate);
    }
    std::vector<HeatmapCell> out;
    for (auto& [key, values] : cells) {
        const auto& [algorithm, nb, fb] = key;
        out.push_back({nb, fb, algorithm, values.size(), median(values)});
    }
    return out;
}

} // namespace msglon
