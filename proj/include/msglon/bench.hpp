#ifndef MSGLON_BENCH_HPP
#define MSGLON_BENCH_HPP

// DE/rand/1/bin and CMA-ES on MSG instances, maximizing f over [0,1]^d.

#include "msglon/msg.hpp"
#include "msglon/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msglon {

enum class SuccessMetric { Euclidean, MaxCoordinate };
enum class Algorithm { DE, CMAES };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);
std::string to_string(SuccessMetric metric);
SuccessMetric success_metric_from_string(const std::string& name);

struct BenchProtocol {
    std::size_t trials = 31;
    std::size_t budget_per_dim = 1000; ///< budget = budget_per_dim * d, initial evaluations included
    double success_tol = 1e-2;
    SuccessMetric success_metric = SuccessMetric::Euclidean;
    double conv_tol_x = 1e-11;
    double conv_tol_f = 1e-11;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    // DE
    std::size_t de_population_per_dim = 10;
    double de_crossover = 0.9;
    double de_f_low = 0.5; ///< F ~ U(de_f_low, de_f_high) per individual
    double de_f_high = 1.0;

    // CMA-ES
    double cma_sigma0 = 0.3;

    std::size_t budget(std::size_t dim) const { return budget_per_dim * dim; }
};

void validate(const BenchProtocol& protocol);

struct TrialRecord {
    bool success = false;
    std::size_t evals_used = 0;
    bool converged = false;
    double best_f = 0.0;
    std::vector<double> best_x;
    std::size_t repairs = 0; ///< CMA-ES covariance repairs
};

/// f with an exact evaluation counter and a hard budget.
class BudgetedObjective {
public:
    BudgetedObjective(const MsgInstance& instance, std::size_t budget);

    /// Throws std::logic_error when called with the budget already spent.
    double operator()(std::span<const double> x);

    std::size_t used() const { return used_; }
    std::size_t remaining() const { return budget_ - used_; }
    std::size_t budget() const { return budget_; }

private:
    const MsgInstance& instance_;
    std::size_t budget_;
    std::size_t used_ = 0;
};

/// Distance used by the success test.
double success_distance(std::span<const double> a, std::span<const double> b, SuccessMetric metric);

/// Single trials driven by an explicit stream.
TrialRecord de_trial(const MsgInstance& instance, std::span<const double> optimum, const BenchProtocol& protocol,
                     Rng& rng);
TrialRecord cmaes_trial(const MsgInstance& instance, std::span<const double> optimum,
                        const BenchProtocol& protocol, Rng& rng);

/// CMA-ES default population 4 + floor(3 ln d).
std::size_t cmaes_population(std::size_t dim);

/// All protocol.trials trials. Trial t draws from (seed, "<algorithm>", instance_key, t).
std::vector<TrialRecord> run_de(const MsgInstance& instance, const BenchProtocol& protocol,
                                std::uint64_t instance_key = 0);
std::vector<TrialRecord> run_cmaes(const MsgInstance& instance, const BenchProtocol& protocol,
                                   std::uint64_t instance_key = 0);
std::vector<TrialRecord> run_trials(Algorithm algorithm, const MsgInstance& instance, const BenchProtocol& protocol,
                                    std::uint64_t instance_key = 0);

struct InstancePerformance {
    Algorithm algorithm = Algorithm::DE;
    double success_rate = 0.0;
    double conv_time = 0.0; ///< mean evaluations at termination (budget when not converged)
    std::vector<TrialRecord> trials;
};

InstancePerformance summarize(Algorithm algorithm, std::vector<TrialRecord> trials);
InstancePerformance measure(const MsgInstance& instance, Algorithm algorithm, const BenchProtocol& protocol,
                            std::uint64_t instance_key = 0);

} // namespace msglon

#endif
