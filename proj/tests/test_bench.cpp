#include "msglon/bench.hpp"
#include "msglon/error.hpp"
#include "msglon/msg.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace msglon;

namespace {

BenchProtocol quick_protocol()
{
    BenchProtocol p;
    p.trials = 7;
    p.seed = 11;
    return p;
}

} // namespace

TEST_SUITE("optim_bench")
{
    TEST_CASE("budgeted objective counts exactly and refuses overruns")
    {
        const auto inst = make_random_instance(2, 10, 1);
        BudgetedObjective f(inst, 3);
        const std::vector<double> x = {0.5, 0.5};
        CHECK(f(x) == evaluate(inst, x).value);
        f(x);
        f(x);
        CHECK(f.used() == 3);
        CHECK(f.remaining() == 0);
        CHECK_THROWS_AS(f(x), std::logic_error);
    }

    TEST_CASE("CMA-ES default population")
    {
        CHECK(cmaes_population(2) == 6);
        CHECK(cmaes_population(5) == 8);
        CHECK(cmaes_population(10) == 10);
    }

    TEST_CASE("success distance")
    {
        const std::vector<double> a = {0.0, 0.0}, b = {0.3, 0.4};
        CHECK(success_distance(a, b, SuccessMetric::Euclidean) == doctest::Approx(0.5));
        CHECK(success_distance(a, b, SuccessMetric::MaxCoordinate) == doctest::Approx(0.4));
    }

    TEST_CASE("trials never exceed the budget and stay in the box")
    {
        const auto inst = make_random_instance(3, 150, 2);
        const auto p = quick_protocol();
        for (auto alg : {Algorithm::DE, Algorithm::CMAES}) {
            for (const auto& t : run_trials(alg, inst, p)) {
                CHECK(t.evals_used <= p.budget(3));
                CHECK(t.evals_used > 0);
                REQUIRE(t.best_x.size() == 3);
                for (double v : t.best_x) {
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                }
                CHECK(t.best_f == evaluate(inst, t.best_x).value);
                if (!t.converged)
                    CHECK(t.evals_used == p.budget(3));
            }
        }
    }

    TEST_CASE("trials are deterministic and thread-independent")
    {
        const auto inst = make_random_instance(2, 100, 3);
        auto p = quick_protocol();
        for (auto alg : {Algorithm::DE, Algorithm::CMAES}) {
            const auto a = run_trials(alg, inst, p, 42);
            p.threads = 4;
            const auto b = run_trials(alg, inst, p, 42);
            p.threads = 1;
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].best_x == b[i].best_x);
                CHECK(a[i].evals_used == b[i].evals_used);
                CHECK(a[i].success == b[i].success);
            }
            const auto c = run_trials(alg, inst, p, 43);
            bool differs = false;
            for (std::size_t i = 0; i < a.size(); ++i)
                differs = differs || a[i].best_x != c[i].best_x;
            CHECK(differs);
        }
    }

    TEST_CASE("UniModal instances are solved")
    {
        const auto inst = make_archetype(Archetype::UniModal, 2, 100, 1);
        BenchProtocol p;
        p.seed = 5;
        for (auto alg : {Algorithm::DE, Algorithm::CMAES}) {
            const auto perf = measure(inst, alg, p);
            CHECK(perf.trials.size() == 31);
            CHECK(perf.success_rate >= 30.0 / 31.0);
        }
    }

    TEST_CASE("conv_time equals the budget when nothing converges")
    {
        const auto inst = make_random_instance(2, 100, 4);
        auto p = quick_protocol();
        p.conv_tol_x = std::numeric_limits<double>::denorm_min();
        p.conv_tol_f = std::numeric_limits<double>::denorm_min();
        for (auto alg : {Algorithm::DE, Algorithm::CMAES}) {
            const auto perf = measure(inst, alg, p);
            CHECK(perf.conv_time == 2000.0);
        }
    }

    TEST_CASE("an infinite success tolerance makes every trial a success")
    {
        const auto inst = make_random_instance(2, 100, 5);
        auto p = quick_protocol();
        p.success_tol = std::numeric_limits<double>::infinity();
        for (auto alg : {Algorithm::DE, Algorithm::CMAES})
            CHECK(measure(inst, alg, p).success_rate == 1.0);
    }

    TEST_CASE("summary averages over trials")
    {
        std::vector<TrialRecord> trials(4);
        trials[0].success = true;
        trials[0].evals_used = 100;
        trials[1].evals_used = 200;
        trials[2].success = true;
        trials[2].evals_used = 300;
        trials[3].evals_used = 400;
        const auto s = summarize(Algorithm::DE, trials);
        CHECK(s.success_rate == 0.5);
        CHECK(s.conv_time == 250.0);
    }

    TEST_CASE("invalid protocols and names are rejected")
    {
        BenchProtocol p;
        p.trials = 0;
        CHECK_THROWS_AS(validate(p), ValidationError);
        p = {};
        p.de_f_low = 1.5;
        CHECK_THROWS_AS(validate(p), ValidationError);
        CHECK(algorithm_from_string("cmaes") == Algorithm::CMAES);
        CHECK(success_metric_from_string("max") == SuccessMetric::MaxCoordinate);
        CHECK_THROWS_AS(algorithm_from_string("pso"), ValidationError);
    }
}
