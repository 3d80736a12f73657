#include "msglon/analysis.hpp"
#include "msglon/error.hpp"
#include "msglon/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace msglon;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

DatasetRecord record(const std::string& id, const std::string& alg, double nodes, double funnel,
                     std::optional<double> success)
{
    DatasetRecord r;
    r.instance_id = id;
    r.dim = 2;
    r.components = 100;
    r.mode = "ns-plus";
    r.seed = 7;
    r.generation = 3;
    r.algorithm = alg;
    r.features.num_nodes = nodes;
    r.features.global_funnel_size = funnel;
    r.features.in_strength_opt = 0.1 * nodes;
    r.success_rate = success;
    if (success)
        r.conv_time = 2000.0 - 100.0 * *success;
    return r;
}

} // namespace

TEST_SUITE("analysis")
{
    TEST_CASE("coverage of one point and of a full grid")
    {
        const std::vector<FeaturePoint> one = {{1.0, 1.0}};
        CHECK(coverage(one, 100).coverage == doctest::Approx(1.0 / 900.0));
        CHECK(coverage(one, 100).at(0, 29) == 1);

        std::vector<FeaturePoint> all;
        for (std::size_t a = 0; a < 30; ++a) {
            for (std::size_t b = 0; b < 30; ++b)
                all.push_back({1.0 + (a + 0.5) / 30.0 * 30.0, (b + 0.5) / 30.0});
        }
        const auto grid = coverage(all, 31);
        CHECK(grid.coverage == 1.0);
        CHECK(grid.instances == 900);
    }

    TEST_CASE("bin edges")
    {
        CHECK(coverage_bin(0.0) == 0);
        CHECK(coverage_bin(1.0) == 29);
        CHECK(coverage_bin(0.5) == 15);
        CHECK(coverage_bin(1.0 / 30.0 - 1e-12) == 0);
        CHECK(normalized_nodes(1, 100) == 0.0);
        CHECK(normalized_nodes(100, 100) == 1.0);
        CHECK(normalized_nodes(1, 1) == 0.0);
    }

    TEST_CASE("coverage never decreases when points are added")
    {
        Rng rng(4);
        std::vector<FeaturePoint> pts;
        double last = 0.0;
        for (int i = 0; i < 500; ++i) {
            pts.push_back({1.0 + 99.0 * rng.uniform(), rng.uniform()});
            const double c = coverage(pts, 100).coverage;
            CHECK(c >= last);
            last = c;
        }
    }

    TEST_CASE("spearman on monotone data")
    {
        const std::vector<double> x = {1, 2, 3, 4, 5};
        const std::vector<double> up = {10, 20, 25, 70, 100};
        const std::vector<double> down = {5, 4, 3, 2, 1};
        CHECK(*spearman(x, up) == doctest::Approx(1.0));
        CHECK(*spearman(x, down) == doctest::Approx(-1.0));
    }

    TEST_CASE("spearman with ties matches hand ranks")
    {
        const std::vector<double> x = {1, 2, 2, 3, 4, 4};
        const std::vector<double> y = {2, 1, 3, 3, 5, 4};
        const std::vector<double> rx = {1, 2.5, 2.5, 4, 5.5, 5.5};
        const std::vector<double> ry = {2, 1, 3.5, 3.5, 6, 5};
        CHECK(average_ranks(x) == rx);
        CHECK(average_ranks(y) == ry);
        const double want = pearson(rx, ry);
        CHECK(std::abs(*spearman(x, y) - want) < 1e-12);
        CHECK(std::abs(want - 0.8508410434878082) < 1e-12);
    }

    TEST_CASE("spearman is invariant under monotone transforms")
    {
        Rng rng(8);
        std::vector<double> x(50), y(50), ex(50), cy(50);
        for (std::size_t i = 0; i < 50; ++i) {
            x[i] = rng.uniform();
            y[i] = x[i] + 0.3 * rng.normal();
            ex[i] = std::exp(3 * x[i]);
            cy[i] = y[i] * y[i] * y[i];
        }
        CHECK(*spearman(ex, cy) == doctest::Approx(*spearman(x, y)).epsilon(1e-12));
    }

    TEST_CASE("spearman degenerate inputs")
    {
        const std::vector<double> flat = {3, 3, 3};
        const std::vector<double> x = {1, 2, 3};
        CHECK_FALSE(spearman(flat, x).has_value());
        CHECK_FALSE(spearman(x, flat).has_value());
        CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), StructuralError);
        CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2}), StructuralError);
    }

    TEST_CASE("export with an empty corpus has no rows")
    {
        const std::vector<PerformanceRow> perf = {{"a", "de", 1.0, 10.0}};
        const auto r = export_dataset({}, perf);
        CHECK(r.records.empty());
        CHECK(r.missing == 0);
        CHECK(dataset_from_csv(dataset_to_csv(r.records)).empty());
    }

    TEST_CASE("export joins performance per algorithm and counts gaps")
    {
        std::vector<CorpusEntry> corpus(3);
        for (std::size_t i = 0; i < 3; ++i) {
            corpus[i].instance_id = "i" + std::to_string(i);
            corpus[i].dim = 2;
            corpus[i].components = 100;
            corpus[i].mode = "ns";
            corpus[i].features.num_nodes = static_cast<double>(i + 1);
        }
        const std::vector<PerformanceRow> perf = {
            {"i0", "de", 0.5, 100}, {"i1", "de", 1.0, 50}, {"i0", "cmaes", 0.0, 2000}};
        const auto r = export_dataset(corpus, perf);
        CHECK(r.records.size() == 6);
        CHECK(r.missing == 3);
        CHECK(r.records[0].algorithm == "cmaes");
        CHECK(r.records[0].success_rate == 0.0);
        CHECK(r.records[1].algorithm == "de");
        CHECK(r.records[1].success_rate == 0.5);
        CHECK_FALSE(r.records[4].success_rate.has_value());
    }

    TEST_CASE("dataset CSV round-trip")
    {
        std::vector<DatasetRecord> rs = {record("a", "de", 3, 0.25, 0.5), record("b", "de", 17, 1.0 / 3.0, std::nullopt)};
        rs[0].features.avg_path_sinks = 0.1 + 0.2;
        const std::string text = dataset_to_csv(rs);
        CHECK(text.rfind("instance_id,d,m,mode,seed,generation,algorithm,num_nodes,", 0) == 0);
        CHECK(dataset_from_csv(text) == rs);
        CHECK_THROWS_AS(dataset_from_csv("bogus,header\n1,2\n"), ValidationError);
        CHECK(dataset_columns().size() == 17);
    }

    TEST_CASE("correlation table groups by algorithm and dimension")
    {
        std::vector<DatasetRecord> rs;
        for (int i = 0; i < 10; ++i) {
            rs.push_back(record("x" + std::to_string(i), "de", i + 1, 0.1 * i, 0.1 * i));
            rs.push_back(record("x" + std::to_string(i), "cmaes", i + 1, 0.1 * i, 1.0 - 0.1 * i));
        }
        rs.push_back(record("gap", "de", 5, 0.5, std::nullopt));
        const auto table = correlation_table(rs);
        CHECK(table.size() == 2 * 8 * 2);
        for (const auto& e : table) {
            CHECK(e.samples == 10);
            if (e.feature == std::string("num_nodes") && e.metric == "success_rate")
                CHECK(*e.rho == doctest::Approx(e.algorithm == "de" ? 1.0 : -1.0));
            if (e.feature == std::string("num_sinks"))
                CHECK_FALSE(e.rho.has_value());
        }
    }

    TEST_CASE("heatmap medians per cell")
    {
        std::vector<DatasetRecord> rs = {record("a", "de", 1, 0.0, 0.2), record("b", "de", 1, 0.0, 0.6),
                                         record("c", "de", 1, 0.0, 1.0), record("d", "de", 100, 1.0, 0.0)};
        const auto cells = success_heatmap(rs);
        REQUIRE(cells.size() == 2);
        CHECK(cells[0].node_bin == 0);
        CHECK(cells[0].instances == 3);
        CHECK(cells[0].median_success == doctest::Approx(0.6));
        CHECK(cells[1].node_bin == 29);
        CHECK(cells[1].funnel_bin == 29);
        CHECK(median({1, 2, 3, 4}) == 2.5);
    }
}
