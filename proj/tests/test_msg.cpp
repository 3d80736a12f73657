#include "msglon/error.hpp"
#include "msglon/lon.hpp"
#include "msglon/msg.hpp"
#include "msglon/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace msglon;

namespace {

MsgInstance single_gaussian()
{
    return MsgInstance(2, {{{0.5, 0.5}, 1.0, 0.1}});
}

} // namespace

TEST_SUITE("msg_core")
{
    TEST_CASE("evaluate at the center of a single Gaussian")
    {
        const auto inst = single_gaussian();
        const auto e = evaluate(inst, std::vector<double>{0.5, 0.5});
        CHECK(e.value == 1.0);
        CHECK(e.index == 0);
    }

    TEST_CASE("evaluate one sigma away")
    {
        const auto inst = single_gaussian();
        const auto e = evaluate(inst, std::vector<double>{0.6, 0.5});
        CHECK(e.value == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
        CHECK(e.index == 0);
    }

    TEST_CASE("evaluate agrees with a naive loop on a grid")
    {
        const auto inst = make_random_instance(2, 10, 3);
        for (int a = 0; a < 10; ++a) {
            for (int b = 0; b < 10; ++b) {
                const std::vector<double> x = {a / 9.0, b / 9.0};
                const auto got = evaluate(inst, x);
                const auto want = oracle::naive_evaluate(inst, x);
                CHECK(got.index == want.index);
                CHECK(got.value == doctest::Approx(want.value).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("f dominates every component (random points)")
    {
        Rng rng(11);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto inst = make_random_instance(3, 60, seed);
            for (int trial = 0; trial < 200; ++trial) {
                std::vector<double> x(3);
                for (auto& v : x)
                    v = rng.uniform();
                const auto e = evaluate(inst, x);
                for (std::size_t i = 0; i < inst.size(); ++i)
                    CHECK(e.value >= inst.gaussian(i, x) * (1 - 1e-15));
                CHECK(e.value == inst.gaussian(e.index, x));
                CHECK(inst.argmax(x) == inst.argmax_exhaustive(x));
            }
        }
    }

    TEST_CASE("ties go to the lowest index")
    {
        const MsgInstance inst(1, {{{0.2}, 0.5, 0.1}, {{0.8}, 0.5, 0.1}});
        CHECK(evaluate(inst, std::vector<double>{0.5}).index == 0);
    }

    TEST_CASE("dimension mismatch is a structural error")
    {
        const auto inst = single_gaussian();
        CHECK_THROWS_AS(evaluate(inst, std::vector<double>{0.5}), StructuralError);
        CHECK_THROWS_AS(MsgInstance(2, {{{0.5}, 1.0, 0.1}}), StructuralError);
    }

    TEST_CASE("invalid components are rejected")
    {
        CHECK_THROWS_AS(MsgInstance(1, {{{0.5}, 0.0, 0.1}}), ValidationError);
        CHECK_THROWS_AS(MsgInstance(1, {{{0.5}, 1.5, 0.1}}), ValidationError);
        CHECK_THROWS_AS(MsgInstance(1, {{{0.5}, 1.0, -0.1}}), ValidationError);
        CHECK_THROWS_AS(MsgInstance(1, {{{1.5}, 1.0, 0.1}}), ValidationError);
        CHECK_THROWS_AS(MsgInstance(1, {{{0.5}, 1.0, 0.1}, {{0.5}, 0.5, 0.2}}), ValidationError);
    }

    TEST_CASE("single Gaussian is its own optimum")
    {
        const auto set = enumerate_local_optima(single_gaussian());
        CHECK(set.indices == std::vector<std::size_t>{0});
        CHECK(set.global_index == 0);
    }

    TEST_CASE("dominated center is not an optimum")
    {
        // g0 is broad and tall; at c1 it beats g1.
        const MsgInstance inst(2, {{{0.5, 0.5}, 1.0, 0.3}, {{0.55, 0.5}, 0.5, 0.02}});
        REQUIRE(inst.gaussian(0, inst.center(1)) > inst.gaussian(1, inst.center(1)));
        const auto set = enumerate_local_optima(inst);
        CHECK(set.indices == std::vector<std::size_t>{0});
    }

    TEST_CASE("enumeration spends exactly m evaluations")
    {
        for (std::size_t m : {1u, 7u, 100u}) {
            const auto set = enumerate_local_optima(make_random_instance(2, m, 5));
            CHECK(set.evaluations == m);
            CHECK(std::find(set.indices.begin(), set.indices.end(), set.global_index) != set.indices.end());
        }
    }

    TEST_CASE("optimum set equals hill-climb endpoints from every center")
    {
        for (std::uint64_t seed = 100; seed < 110; ++seed) {
            CAPTURE(seed);
            const auto inst = make_random_instance(2, 20, seed);
            std::set<std::size_t> endpoints;
            for (std::size_t i = 0; i < inst.size(); ++i) {
                const auto end = oracle::hill_climb(inst, inst.component(i).center);
                const auto hit = oracle::center_at(inst, end, 1e-6);
                REQUIRE(hit.has_value());
                endpoints.insert(*hit);
            }
            const auto set = enumerate_local_optima(inst);
            CHECK(std::set<std::size_t>(set.indices.begin(), set.indices.end()) == endpoints);
        }
    }

    TEST_CASE("archetypes")
    {
        const std::size_t d = 2, m = 100;
        const auto centers = sample_centers(d, m);

        SUBCASE("uni-modal has a single optimum")
        {
            const auto inst = make_archetype(Archetype::UniModal, d, m, 1);
            CHECK(enumerate_local_optima(inst).indices.size() == 1);
            const auto& comps = inst.components();
            const auto peak = enumerate_local_optima(inst).global_index;
            CHECK(comps[peak].weight == 1.0);
            CHECK(comps[peak].sigma == doctest::Approx(sigma_max(d, m)));
            for (std::size_t j = 0; j < m; ++j) {
                if (j == peak)
                    continue;
                CHECK(comps[j].sigma == doctest::Approx(sigma_min(d, m)));
                CHECK(comps[j].weight == doctest::Approx(inst.gaussian(peak, inst.center(j))).epsilon(1e-12));
            }
        }

        SUBCASE("multi-sink weights are normalized")
        {
            const auto p = archetype_parameters(Archetype::MultiSink, d, centers, 42);
            CHECK(std::count(p.weights.begin(), p.weights.end(), 1.0) == 1);
            for (double w : p.weights) {
                CHECK(w > 0.0);
                CHECK(w <= 1.0);
            }
            for (double s : p.sigmas)
                CHECK(s == doctest::Approx(sigma_min(d, m)));
        }

        SUBCASE("uni-sink weight falls with distance")
        {
            const auto p = archetype_parameters(Archetype::UniSink, d, centers, 0);
            const auto peak = static_cast<std::size_t>(std::find(p.weights.begin(), p.weights.end(), 1.0) - p.weights.begin());
            REQUIRE(peak < m);
            std::size_t farthest = peak;
            double far = -1.0;
            for (std::size_t j = 0; j < m; ++j) {
                double sq = 0.0;
                for (std::size_t k = 0; k < d; ++k)
                    sq += std::pow(centers[j * d + k] - centers[peak * d + k], 2);
                if (sq > far) {
                    far = sq;
                    farthest = j;
                }
            }
            double lowest = 2.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (j != peak)
                    lowest = std::min(lowest, p.weights[j]);
            }
            CHECK(p.weights[farthest] == lowest);
            // Linear in distance: w = 1 - 0.9 dist / max_dist.
            for (std::size_t j = 0; j < m; ++j) {
                double sq = 0.0;
                for (std::size_t k = 0; k < d; ++k)
                    sq += std::pow(centers[j * d + k] - centers[peak * d + k], 2);
                CHECK(p.weights[j] == doctest::Approx(1.0 - 0.9 * std::sqrt(sq / far)));
            }
        }
    }

    TEST_CASE("random parameters respect bounds")
    {
        const auto p = random_parameters(5, 250, 8);
        for (double w : p.weights) {
            CHECK(w > 0.0);
            CHECK(w <= 1.0);
        }
        for (double s : p.sigmas) {
            CHECK(s >= sigma_min(5, 250));
            CHECK(s <= sigma_max(5, 250));
        }
    }
}
