#include "msglon/error.hpp"
#include "msglon/novelty.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace msglon;

namespace {

NsConfig small_config(std::uint64_t seed = 1)
{
    NsConfig c;
    c.dim = 2;
    c.components = 20;
    c.mu = 6;
    c.lambda = 10;
    c.t_max = 3;
    c.k = 4;
    c.lon_samples = 200;
    c.seed = seed;
    return c;
}

// Brute force: all pairwise distances sorted, first k averaged.
double knn_oracle(const Phenotype& z, const std::vector<Phenotype>& ref, std::size_t k, long self)
{
    std::vector<double> d;
    for (long i = 0; i < static_cast<long>(ref.size()); ++i) {
        if (i != self)
            d.push_back(std::hypot(z[0] - ref[i][0], z[1] - ref[i][1]));
    }
    std::sort(d.begin(), d.end());
    double s = 0;
    const std::size_t n = std::min(k, d.size());
    for (std::size_t i = 0; i < n; ++i)
        s += d[i];
    return s / static_cast<double>(n);
}

} // namespace

TEST_SUITE("novelty_gen")
{
    TEST_CASE("novelty of hand examples")
    {
        const std::vector<Phenotype> ref = {{0, 0}, {3, 4}, {1, 0}};
        CHECK(novelty({0, 0}, ref, 1) == 0.0);
        CHECK(novelty({0, 0}, ref, 1, 0) == 1.0);
        CHECK(novelty({0, 0}, ref, 2, 0) == doctest::Approx(3.0));
        CHECK(novelty({0, 0}, ref, 15, 0) == doctest::Approx(3.0));
        CHECK(std::isinf(novelty({0, 0}, std::vector<Phenotype>{}, 3)));
        CHECK(std::isinf(novelty({0, 0}, std::vector<Phenotype>{{1, 1}}, 3, 0)));
        CHECK_THROWS_AS(novelty({0, 0}, ref, 0), ValidationError);
    }

    TEST_CASE("novelty matches a brute-force k-NN")
    {
        Rng rng(2);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Phenotype> ref(1 + rng.below(40));
            for (auto& p : ref)
                p = {rng.uniform(), rng.uniform()};
            const std::size_t k = 1 + rng.below(20);
            const long self = static_cast<long>(rng.below(ref.size()));
            const double got = novelty(ref[static_cast<std::size_t>(self)], ref, k, static_cast<std::size_t>(self));
            if (ref.size() == 1)
                CHECK(std::isinf(got));
            else
                CHECK(got == doctest::Approx(knn_oracle(ref[static_cast<std::size_t>(self)], ref, k, self)).epsilon(1e-14));
        }
    }

    TEST_CASE("threshold adaptation")
    {
        NsConfig c;
        CHECK(adapt_threshold(1.0, 0, c) == doctest::Approx(0.95));
        CHECK(adapt_threshold(1.0, 31, c) == doctest::Approx(1.05));
        CHECK(adapt_threshold(1.0, 30, c) == 1.0);
        CHECK(adapt_threshold(1.0, 1, c) == 1.0);
    }

    TEST_CASE("t_max = 0 yields the initial population only")
    {
        auto c = small_config();
        c.t_max = 0;
        const auto all = ns_run(c);
        CHECK(all.size() == c.mu);
    }

    TEST_CASE("run produces mu + t_max lambda solutions with a population of mu")
    {
        const auto c = small_config();
        NoveltySearch ns(c);
        CHECK(ns.archive().size() == c.mu);
        for (std::size_t t = 1; t <= c.t_max; ++t) {
            ns.step();
            CHECK(ns.generation() == t);
            CHECK(ns.parents().size() == c.mu);
            CHECK(ns.all_solutions().size() == c.mu + t * c.lambda);
            std::vector<std::size_t> p = ns.parents();
            std::sort(p.begin(), p.end());
            CHECK(std::adjacent_find(p.begin(), p.end()) == p.end());
        }
        for (std::size_t i = 0; i < ns.all_solutions().size(); ++i)
            CHECK(ns.all_solutions()[i].id == i);
    }

    TEST_CASE("archive insertions exceed the threshold in force")
    {
        auto c = small_config(3);
        c.t_max = 8;
        NoveltySearch ns(c);
        ns.run();
        CHECK(ns.archive().size() == c.mu + ns.insertions().size());
        for (const auto& ins : ns.insertions()) {
            CHECK(ins.novelty > ins.threshold);
            CHECK(ns.all_solutions()[ins.id].generation == ins.generation);
        }
        REQUIRE(ns.threshold_trace().size() == c.t_max);
        // Threshold only moves at window boundaries.
        for (std::size_t g = 1; g < c.t_max; ++g) {
            if ((g + 1) % c.window != 0)
                CHECK(ns.threshold_trace()[g] == ns.threshold_trace()[g - 1]);
        }
    }

    TEST_CASE("window without insertions lowers the threshold")
    {
        auto c = small_config(4);
        c.rho_min_init = 1e9;
        c.t_max = 4;
        NoveltySearch ns(c);
        ns.run();
        CHECK(ns.insertions().empty());
        CHECK(ns.threshold() == doctest::Approx(1e9 * 0.95));
    }

    TEST_CASE("window with many insertions raises the threshold")
    {
        auto c = small_config(5);
        c.rho_min_init = 1e-300;
        c.t_max = 4;
        NoveltySearch ns(c);
        ns.run();
        // Up to 40 offspring above a vanishing threshold (exact duplicates score 0).
        if (ns.insertions().size() > c.window_hi)
            CHECK(ns.threshold() == doctest::Approx(1e-300 * 1.05));
        else
            CHECK(ns.threshold() == 1e-300);
    }

    TEST_CASE("genotypes respect bounds and phenotypes are consistent")
    {
        const auto c = small_config(6);
        const auto all = ns_run(c);
        NoveltySearch ref(c);
        for (const auto& s : all) {
            REQUIRE(s.genotype.weights.size() == c.m());
            for (double w : s.genotype.weights) {
                CHECK(w >= c.weight_floor);
                CHECK(w <= 1.0);
            }
            for (double sg : s.genotype.sigmas) {
                CHECK(sg >= c.sigma_lo());
                CHECK(sg <= c.sigma_hi());
            }
            CHECK(s.phenotype[0] == s.features.num_nodes / static_cast<double>(c.m()));
            CHECK(s.phenotype[1] == s.features.global_funnel_size);
        }
        // Re-evaluating a stored genotype reproduces its features.
        const auto& s = all.back();
        const auto again = evaluate_genotype(c, ref.centers(), s.genotype, s.lon_seed);
        CHECK(again.features == s.features);
    }

    TEST_CASE("runs are deterministic and thread-independent")
    {
        auto c = small_config(7);
        const auto a = ns_run(c);
        c.threads = 4;
        const auto b = ns_run(c);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].genotype.weights == b[i].genotype.weights);
            CHECK(a[i].genotype.sigmas == b[i].genotype.sigmas);
            CHECK(a[i].features == b[i].features);
            CHECK(a[i].parent == b[i].parent);
        }
    }

    TEST_CASE("NS+ seeds the three archetypes")
    {
        auto c = small_config(8);
        c.seeded_archetypes = true;
        NoveltySearch ns(c);
        const auto& all = ns.all_solutions();
        CHECK(all[0].origin == "archetype:unimodal");
        CHECK(all[1].origin == "archetype:unisink");
        CHECK(all[2].origin == "archetype:multisink");
        CHECK(all[3].origin == "random");
        CHECK(all[0].features.num_nodes == 1);
        CHECK(all[2].features.num_nodes == static_cast<double>(c.m()));
    }

    TEST_CASE("random baseline matches the corpus size and bounds")
    {
        const auto c = small_config(9);
        const auto all = random_baseline(c);
        CHECK(all.size() == c.mu + c.t_max * c.lambda);
        for (const auto& s : all) {
            for (double w : s.genotype.weights) {
                CHECK(w > 0.0);
                CHECK(w <= 1.0);
            }
            for (double sg : s.genotype.sigmas) {
                CHECK(sg >= c.sigma_lo());
                CHECK(sg <= c.sigma_hi());
            }
        }
    }

    TEST_CASE("mode names round-trip and bad configs are rejected")
    {
        for (auto m : {NsMode::Random, NsMode::Novelty, NsMode::NoveltyPlus})
            CHECK(ns_mode_from_string(to_string(m)) == m);
        CHECK_THROWS_AS(ns_mode_from_string("evolve"), ValidationError);
        auto c = small_config();
        c.mu = 0;
        CHECK_THROWS_AS(validate(c), ValidationError);
    }
}
