#include "msglon/bench.hpp"

#include "msglon/error.hpp"
#include "msglon/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace msglon {

std::string to_string(Algorithm algorithm)
{
    return algorithm == Algorithm::DE ? "de" : "cmaes";
}

Algorithm algorithm_from_string(const std::string& name)
{
    if (name == "de")
        return Algorithm::DE;
    if (name == "cmaes")
        return Algorithm::CMAES;
    throw ValidationError("unknown algorithm '" + name + "' (expected de or cmaes)");
}

std::string to_string(SuccessMetric metric)
{
    return metric == SuccessMetric::Euclidean ? "euclidean" : "max";
}

SuccessMetric success_metric_from_string(const std::string& name)
{
    if (name == "euclidean")
        return SuccessMetric::Euclidean;
    if (name == "max")
        return SuccessMetric::MaxCoordinate;
    throw ValidationError("unknown success metric '" + name + "' (expected euclidean or max)");
}

void validate(const BenchProtocol& p)
{
    if (p.trials == 0 || p.budget_per_dim == 0)
        throw ValidationError("bench: trials and budget must be positive");
    if (!(p.success_tol > 0.0) || !(p.conv_tol_x > 0.0) || !(p.conv_tol_f > 0.0))
        throw ValidationError("bench: tolerances must be positive");
    if (p.de_population_per_dim == 0 || !(p.de_crossover >= 0.0 && p.de_crossover <= 1.0))
        throw ValidationError("bench: bad DE settings");
    if (!(p.de_f_low > 0.0 && p.de_f_low <= p.de_f_high))
        throw ValidationError("bench: DE dither range must satisfy 0 < low <= high");
    if (!(p.cma_sigma0 > 0.0))
        throw ValidationError("bench: CMA-ES sigma0 must be positive");
}

BudgetedObjective::BudgetedObjective(const MsgInstance& instance, std::size_t budget)
    : instance_(instance), budget_(budget)
{
}

double BudgetedObjective::operator()(std::span<const double> x)
{
    if (used_ >= budget_)
        throw std::logic_error("objective called beyond its evaluation budget");
    ++used_;
    return evaluate(instance_, x).value;
}

double success_distance(std::span<const double> a, std::span<const double> b, SuccessMetric metric)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = std::abs(a[k] - b[k]);
        acc = metric == SuccessMetric::Euclidean ? acc + diff * diff : std::max(acc, diff);
    }
    return metric == SuccessMetric::Euclidean ? std::sqrt(acc) : acc;
}

namespace {

void finish(TrialRecord& record, const BudgetedObjective& objective, std::span<const double> optimum,
            const BenchProtocol& protocol)
{
    record.evals_used = objective.used();
    record.success = success_distance(record.best_x, optimum, protocol.success_metric) < protocol.success_tol;
}

} // namespace

TrialRecord de_trial(const MsgInstance& instance, std::span<const double> optimum, const BenchProtocol& protocol,
                     Rng& rng)
{
    const std::size_t d = instance.dim();
    const std::size_t np = std::max<std::size_t>(4, protocol.de_population_per_dim * d);
    BudgetedObjective f(instance, protocol.budget(d));
    TrialRecord record;
    record.best_f = -std::numeric_limits<double>::infinity();

    std::vector<double> population(np * d), fitness(np, -std::numeric_limits<double>::infinity());
    auto member = [&](std::vector<double>& pop, std::size_t i) { return std::span<double>(&pop[i * d], d); };
    auto consider = [&](std::span<const double> x, double value) {
        if (value > record.best_f) {
            record.best_f = value;
            record.best_x.assign(x.begin(), x.end());
        }
    };

    for (auto& v : population)
        v = rng.uniform();
    std::size_t evaluated = 0;
    for (; evaluated < np && f.remaining() > 0; ++evaluated) {
        fitness[evaluated] = f(member(population, evaluated));
        consider(member(population, evaluated), fitness[evaluated]);
    }
    // A budget smaller than the population leaves part of it unevaluated; nothing else to do.
    if (evaluated < np) {
        finish(record, f, optimum, protocol);
        return record;
    }

    std::vector<double> next = population;
    std::vector<double> next_fitness = fitness;
    std::vector<double> trial(d);
    while (f.remaining() > 0) {
        for (std::size_t i = 0; i < np && f.remaining() > 0; ++i) {
            std::size_t r1, r2, r3;
            do
                r1 = rng.below(np);
            while (r1 == i);
            do
                r2 = rng.below(np);
            while (r2 == i || r2 == r1);
            do
                r3 = rng.below(np);
            while (r3 == i || r3 == r1 || r3 == r2);
            const double scale = rng.uniform(protocol.de_f_low, protocol.de_f_high);
            const std::size_t forced = rng.below(d);
            const auto a = member(population, r1);
            const auto b = member(population, r2);
            const auto c = member(population, r3);
            const auto target = member(population, i);
            for (std::size_t j = 0; j < d; ++j) {
                const bool cross = rng.uniform() < protocol.de_crossover || j == forced;
                trial[j] = cross ? std::clamp(a[j] + scale * (b[j] - c[j]), 0.0, 1.0) : target[j];
            }
            const double value = f(trial);
            consider(trial, value);
            if (value >= fitness[i]) {
                std::copy(trial.begin(), trial.end(), member(next, i).begin());
                next_fitness[i] = value;
            }
        }
        population = next;
        fitness = next_fitness;

        double spread_x = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (std::size_t i = 0; i < np; ++i) {
                lo = std::min(lo, population[i * d + j]);
                hi = std::max(hi, population[i * d + j]);
            }
            spread_x = std::max(spread_x, hi - lo);
        }
        const auto [fmin, fmax] = std::minmax_element(fitness.begin(), fitness.end());
        if (spread_x < protocol.conv_tol_x && *fmax - *fmin < protocol.conv_tol_f) {
            record.converged = true;
            break;
        }
    }
    finish(record, f, optimum, protocol);
    return record;
}

std::size_t cmaes_population(std::size_t dim)
{
    return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

TrialRecord cmaes_trial(const MsgInstance& instance, std::span<const double> optimum,
                        const BenchProtocol& protocol, Rng& rng)
{
    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    const std::size_t n = instance.dim();
    const auto N = static_cast<double>(n);
    const std::size_t lambda = cmaes_population(n);
    const std::size_t mu = lambda / 2;

    VectorXd weights(mu);
    for (std::size_t i = 0; i < mu; ++i)
        weights[static_cast<Eigen::Index>(i)] = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
    weights /= weights.sum();
    const double mueff = 1.0 / weights.squaredNorm();

    const double cs = (mueff + 2.0) / (N + mueff + 5.0);
    const double ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (N + 1.0)) - 1.0) + cs;
    const double cc = (4.0 + mueff / N) / (N + 4.0 + 2.0 * mueff / N);
    const double c1 = 2.0 / ((N + 1.3) * (N + 1.3) + mueff);
    const double cmu = std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((N + 2.0) * (N + 2.0) + mueff));
    const double chi_n = std::sqrt(N) * (1.0 - 1.0 / (4.0 * N) + 1.0 / (21.0 * N * N));

    BudgetedObjective f(instance, protocol.budget(n));
    TrialRecord record;
    record.best_f = -std::numeric_limits<double>::infinity();

    VectorXd mean(n);
    for (std::size_t j = 0; j < n; ++j)
        mean[static_cast<Eigen::Index>(j)] = rng.uniform();
    double sigma = protocol.cma_sigma0;
    MatrixXd C = MatrixXd::Identity(n, n);
    MatrixXd B = MatrixXd::Identity(n, n);
    VectorXd D = VectorXd::Ones(n); // sqrt of eigenvalues
    VectorXd ps = VectorXd::Zero(n), pc = VectorXd::Zero(n);

    MatrixXd steps(n, lambda); // y_k = (x_k - mean) / sigma after clipping
    std::vector<double> values(lambda);
    std::vector<double> x(n);
    std::vector<std::size_t> order(lambda);
    for (std::size_t generation = 0; f.remaining() > 0; ++generation) {
        std::size_t evaluated = 0;
        for (; evaluated < lambda && f.remaining() > 0; ++evaluated) {
            VectorXd z(n);
            for (std::size_t j = 0; j < n; ++j)
                z[static_cast<Eigen::Index>(j)] = rng.normal();
            const VectorXd candidate = mean + sigma * (B * D.asDiagonal() * z);
            for (std::size_t j = 0; j < n; ++j)
                x[j] = std::clamp(candidate[static_cast<Eigen::Index>(j)], 0.0, 1.0);
            for (std::size_t j = 0; j < n; ++j)
                steps(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(evaluated)) =
                    (x[j] - mean[static_cast<Eigen::Index>(j)]) / sigma;
            values[evaluated] = f(x);
            if (values[evaluated] > record.best_f) {
                record.best_f = values[evaluated];
                record.best_x = x;
            }
        }
        if (evaluated < lambda)
            break;

        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

        VectorXd step = VectorXd::Zero(n);
        for (std::size_t i = 0; i < mu; ++i)
            step += weights[static_cast<Eigen::Index>(i)] * steps.col(static_cast<Eigen::Index>(order[i]));
        mean += sigma * step;

        // C^{-1/2} step
        const VectorXd whitened = B * D.cwiseInverse().asDiagonal() * B.transpose() * step;
        ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mueff) * whitened;
        const double ps_norm = ps.norm();
        const double decay = 1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(generation + 1));
        const bool hsig = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (N + 1.0)) * chi_n;
        pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * step;

        MatrixXd rank_mu = MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < mu; ++i) {
            const auto y = steps.col(static_cast<Eigen::Index>(order[i]));
            rank_mu += weights[static_cast<Eigen::Index>(i)] * y * y.transpose();
        }
        const double old_weight = 1.0 - c1 - cmu + (hsig ? 0.0 : c1 * cc * (2.0 - cc));
        C = old_weight * C + c1 * pc * pc.transpose() + cmu * rank_mu;
        sigma *= std::exp((cs / ds) * (ps_norm / chi_n - 1.0));

        C = 0.5 * (C + C.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(C);
        VectorXd eigenvalues = eig.eigenvalues();
        B = eig.eigenvectors();
        const double top = eigenvalues.maxCoeff();
        const double floor = std::max(top, 0.0) * 1e-14 + std::numeric_limits<double>::min();
        if (eig.info() != Eigen::Success || !eigenvalues.allFinite() || eigenvalues.minCoeff() < floor) {
            ++record.repairs;
            if (eig.info() != Eigen::Success || !eigenvalues.allFinite()) {
                C = MatrixXd::Identity(n, n);
                B = MatrixXd::Identity(n, n);
                eigenvalues = VectorXd::Ones(n);
            } else {
                eigenvalues = eigenvalues.cwiseMax(floor);
                C = B * eigenvalues.asDiagonal() * B.transpose();
            }
        }
        D = eigenvalues.cwiseSqrt();

        const auto [vmin, vmax] = std::minmax_element(values.begin(), values.end());
        if (sigma * D.maxCoeff() < protocol.conv_tol_x && *vmax - *vmin < protocol.conv_tol_f) {
            record.converged = true;
            break;
        }
    }
    finish(record, f, optimum, protocol);
    return record;
}

std::vector<TrialRecord> run_trials(Algorithm algorithm, const MsgInstance& instance, const BenchProtocol& protocol,
                                    std::uint64_t instance_key)
{
    validate(protocol);
    const LocalOptimumSet optima = enumerate_local_optima(instance);
    const auto optimum = instance.center(optima.global_index);
    const std::string tag = to_string(algorithm);
    const std::uint64_t base = stream_key(protocol.seed, tag, instance_key);
    std::vector<TrialRecord> records(protocol.trials);
    parallel_for(protocol.trials, protocol.threads, [&](std::size_t t) {
        Rng rng = derive_stream(base, "trial", t);
        records[t] = algorithm == Algorithm::DE ? de_trial(instance, optimum, protocol, rng)
                                                : cmaes_trial(instance, optimum, protocol, rng);
    });
    return records;
}

std::vector<TrialRecord> run_de(const MsgInstance& instance, const BenchProtocol& protocol, std::uint64_t instance_key)
{
    return run_trials(Algorithm::DE, instance, protocol, instance_key);
}

std::vector<TrialRecord> run_cmaes(const MsgInstance& instance, const BenchProtocol& protocol,
                                   std::uint64_t instance_key)
{
    return run_trials(Algorithm::CMAES, instance, protocol, instance_key);
}

InstancePerformance summarize(Algorithm algorithm, std::vector<TrialRecord> trials)
{
    InstancePerformance p;
    p.algorithm = algorithm;
    if (!trials.empty()) {
        double successes = 0.0, evals = 0.0;
        for (const auto& t : trials) {
            successes += t.success ? 1.0 : 0.0;
            evals += static_cast<double>(t.evals_used);
        }
        p.success_rate = successes / static_cast<double>(trials.size());
        p.conv_time = evals / static_cast<double>(trials.size());
    }
    p.trials = std::move(trials);
    return p;
}

InstancePerformance measure(const MsgInstance& instance, Algorithm algorithm, const BenchProtocol& protocol,
                            std::uint64_t instance_key)
{
    return summarize(algorithm, run_trials(algorithm, instance, protocol, instance_key));
}

} // namespace msglon
