#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

namespace oabe {

/// Platform-stable 64-bit Mersenne Twister; boost's distributions are used
/// with it so a seed gives the same stream on every toolchain.
using Rng = boost::random::mt19937_64;

/// Bees Algorithm parameters. Defaults for the population and patch fields
/// are (n=100, u=20, b=10, nep=30, nsp=20, ngh=0.05).
struct BeesConfig {
    std::size_t scouts = 100;        // n
    std::size_t sites = 20;          // u, selected sites per iteration
    std::size_t elite_sites = 10;    // b, best sites among the selected
    std::size_t elite_recruits = 30; // nep
    std::size_t site_recruits = 20;  // nsp
    double patch_radius = 0.05;      // ngh, fraction of the weight range
    double patch_shrink = 0.9;       // radius factor after a patch fails to improve
    std::size_t max_iterations = 100;
    std::size_t stagnation_limit = 20;
    double fitness_epsilon = 1e-6;
    std::size_t k_max = 10;
    std::uint64_t seed = 0;

    /// Throws ParameterError when an invariant does not hold.
    void validate() const;
    /// Additionally checks k_max <= train_size.
    void validate(std::size_t train_size) const;
};

/// Default analogy ceiling for a training set: min(10, train_size - 1), at least 1.
std::size_t default_k_max(std::size_t train_size);

/// One search point: k analogies and a row-major k x m weight matrix whose
/// rows lie on the probability simplex.
struct CandidateSolution {
    std::size_t k = 0;
    std::size_t features = 0;
    std::vector<double> weights;
    std::optional<double> fitness;

    std::span<const double> row(std::size_t i) const { return {weights.data() + i * features, features}; }
    std::span<double> row(std::size_t i) { return {weights.data() + i * features, features}; }
    /// Shape is k x m, entries are non-negative and every row sums to 1 within `tolerance`.
    bool is_valid(double tolerance = 1e-9) const;
};

CandidateSolution random_solution(Rng& rng, std::size_t m, std::size_t k_max);
/// Perturbs every weight by U[-radius, radius], floors at zero and
/// renormalises each row; a row that collapses to zero is redrawn. k is kept.
CandidateSolution neighborhood_move(Rng& rng, const CandidateSolution& s, double radius);

/// Uniform point on the (m-1)-simplex, written into `row`.
void sample_simplex(Rng& rng, std::span<double> row);

template <class Space>
concept SearchSpace = requires(const Space& space, Rng& rng, const typename Space::Point& p, double r) {
    { space.random(rng) } -> std::convertible_to<typename Space::Point>;
    { space.neighbor(rng, p, r) } -> std::convertible_to<typename Space::Point>;
};

/// Variable-k weight matrices (the OABE encoding). k changes only through
/// fresh scouts; neighbourhood moves keep the shape.
struct WeightMatrixSpace {
    using Point = CandidateSolution;
    std::size_t features = 1;
    std::size_t k_max = 1;

    Point random(Rng& rng) const { return random_solution(rng, features, k_max); }
    Point neighbor(Rng& rng, const Point& p, double radius) const { return neighborhood_move(rng, p, radius); }
};

/// Real vectors in the box [lower, upper]^dims. The patch radius is a
/// fraction of the box width.
struct BoxSpace {
    using Point = std::vector<double>;
    std::size_t dims = 1;
    double lower = -1.0;
    double upper = 1.0;

    Point random(Rng& rng) const;
    Point neighbor(Rng& rng, const Point& p, double radius) const;
};

template <class Point>
struct SearchResult {
    Point best;
    double best_fitness = std::numeric_limits<double>::infinity();
    std::vector<double> trace; // best-ever fitness after each iteration
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
};

struct NoObserver {
    template <class Point>
    void operator()(const Point&, double) const noexcept {}
};

/// Bees Algorithm minimisation over `space`.
///
/// Each iteration ranks the population, recruits `elite_recruits` bees around
/// each of the first `elite_sites` sites and `site_recruits` around the rest
/// of the first `sites`, keeps the best bee of every patch, and replaces the
/// other `scouts - sites` members with random scouts. A patch that does not
/// improve shrinks its radius by `patch_shrink`. The search stops once the
/// best fitness is at most `fitness_epsilon`, after `max_iterations`, or after
/// `stagnation_limit` iterations without improvement of the best.
///
/// `observe(point, fitness)` is called for every evaluated point.
template <SearchSpace Space, class Fitness, class Observer = NoObserver>
SearchResult<typename Space::Point> bees_search(const Space& space, Fitness&& fitness, const BeesConfig& config,
                                                Observer&& observe = {})
{
    using Point = typename Space::Point;
    config.validate();

    struct Bee {
        Point point;
        double fitness;
        double radius;
    };

    Rng rng(config.seed);
    SearchResult<Point> result;

    auto evaluate = [&](Point point, double radius) {
        double f = fitness(std::as_const(point));
        ++result.evaluations;
        observe(std::as_const(point), f);
        return Bee{std::move(point), f, radius};
    };

    std::vector<Bee> population;
    population.reserve(config.scouts);
    for (std::size_t i = 0; i < config.scouts; ++i) {
        population.push_back(evaluate(space.random(rng), config.patch_radius));
    }
    auto track_best = [&]() {
        bool improved = false;
        for (const auto& bee : population) {
            if (bee.fitness < result.best_fitness) {
                result.best = bee.point;
                result.best_fitness = bee.fitness;
                improved = true;
            }
        }
        return improved;
    };
    track_best();

    std::size_t stagnant = 0;
    for (std::size_t iteration = 1; iteration <= config.max_iterations; ++iteration) {
        std::stable_sort(population.begin(), population.end(),
                         [](const Bee& a, const Bee& b) { return a.fitness < b.fitness; });

        for (std::size_t site = 0; site < config.sites; ++site) {
            auto recruits = site < config.elite_sites ? config.elite_recruits : config.site_recruits;
            auto& centre = population[site];
            std::optional<Bee> patch_best;
            for (std::size_t r = 0; r < recruits; ++r) {
                auto bee = evaluate(space.neighbor(rng, centre.point, centre.radius), centre.radius);
                if (bee.fitness < (patch_best ? patch_best->fitness : centre.fitness)) {
                    patch_best = std::move(bee);
                }
            }
            if (patch_best) {
                centre = std::move(*patch_best);
            } else {
                centre.radius *= config.patch_shrink;
            }
        }
        for (std::size_t i = config.sites; i < config.scouts; ++i) {
            population[i] = evaluate(space.random(rng), config.patch_radius);
        }

        stagnant = track_best() ? 0 : stagnant + 1;
        result.trace.push_back(result.best_fitness);
        result.iterations = iteration;
        if (result.best_fitness <= config.fitness_epsilon || stagnant >= config.stagnation_limit) {
            break;
        }
    }
    return result;
}

using FitnessFunction = std::function<double(const CandidateSolution&)>;
using SolutionObserver = std::function<void(const CandidateSolution&, double)>;

struct OptimizerResult {
    CandidateSolution best;
    std::vector<double> trace;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
};

/// Searches variable-k weight matrices with m columns.
OptimizerResult run(const BeesConfig& config, const FitnessFunction& fitness, std::size_t m,
                    const SolutionObserver& observer = {});

} // namespace oabe
