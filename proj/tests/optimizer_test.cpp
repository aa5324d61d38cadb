#include "oabe/errors.hpp"
#include "oabe/optimizer.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <boost/random/uniform_real_distribution.hpp>

#include <cmath>
#include <numeric>

using namespace oabe;

namespace {

CandidateSolution matrix(std::size_t k, std::size_t m, std::vector<double> weights)
{
    return CandidateSolution{k, m, std::move(weights), std::nullopt};
}

// |k - target_k| / k_max plus the L1 distance of every row from `c`.
auto known_optimum(std::vector<double> c, std::size_t target_k, std::size_t k_max)
{
    return [c = std::move(c), target_k, k_max](std::size_t k, auto&& rows) {
        double f = std::abs(static_cast<double>(k) - static_cast<double>(target_k)) / static_cast<double>(k_max);
        for (const auto& row : rows) {
            for (std::size_t j = 0; j < c.size(); ++j) {
                f += std::abs(row[j] - c[j]);
            }
        }
        return f;
    };
}

template <class F>
FitnessFunction on_solution(F f)
{
    return [f](const CandidateSolution& s) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < s.k; ++i) {
            auto r = s.row(i);
            rows.emplace_back(r.begin(), r.end());
        }
        return f(s.k, rows);
    };
}

} // namespace

TEST(BeesConfig, DefaultsAreValid)
{
    BeesConfig config;
    EXPECT_NO_THROW(config.validate());
    EXPECT_EQ(config.scouts, 100u);
    EXPECT_EQ(config.sites, 20u);
    EXPECT_EQ(config.elite_sites, 10u);
    EXPECT_EQ(config.elite_recruits, 30u);
    EXPECT_EQ(config.site_recruits, 20u);
    EXPECT_DOUBLE_EQ(config.patch_radius, 0.05);
}

TEST(BeesConfig, RejectsInconsistentPopulation)
{
    auto broken = [](auto mutate) {
        BeesConfig config;
        mutate(config);
        return config;
    };
    EXPECT_THROW(broken([](BeesConfig& c) { c.sites = 101; }).validate(), ParameterError);
    EXPECT_THROW(broken([](BeesConfig& c) { c.elite_sites = 21; }).validate(), ParameterError);
    EXPECT_THROW(broken([](BeesConfig& c) { c.patch_radius = 0; }).validate(), ParameterError);
    EXPECT_THROW(broken([](BeesConfig& c) { c.k_max = 0; }).validate(), ParameterError);
    EXPECT_THROW(broken([](BeesConfig& c) { c.k_max = 10; }).validate(9), ParameterError);
    EXPECT_NO_THROW(broken([](BeesConfig& c) { c.k_max = 9; }).validate(9));
}

TEST(BeesConfig, DefaultKMax)
{
    EXPECT_EQ(default_k_max(2), 1u);
    EXPECT_EQ(default_k_max(5), 4u);
    EXPECT_EQ(default_k_max(23), 10u);
    EXPECT_EQ(default_k_max(1), 1u);
}

TEST(RandomSolution, SingleFeatureRowsAreOne)
{
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        auto s = random_solution(rng, 1, 6);
        EXPECT_GE(s.k, 1u);
        EXPECT_LE(s.k, 6u);
        for (double w : s.weights) {
            EXPECT_EQ(w, 1.0);
        }
    }
}

TEST(RandomSolution, DeterministicUnderSeed)
{
    Rng a(99), b(99);
    auto x = random_solution(a, 3, 5);
    auto y = random_solution(b, 3, 5);
    EXPECT_EQ(x.k, y.k);
    EXPECT_EQ(x.weights, y.weights);
    EXPECT_TRUE(x.is_valid());
}

TEST(RandomSolution, UniformOnTheSimplex)
{
    Rng rng(2024);
    double sum = 0.0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        auto s = random_solution(rng, 2, 1);
        sum += s.weights[0];
    }
    EXPECT_NEAR(sum / draws, 0.5, 0.02);

    // first coordinate of a uniform 3-simplex point has mean 1/3 and P(x < 0.5) = 3/4
    int below = 0;
    double mean = 0.0;
    std::vector<double> row(3);
    for (int t = 0; t < draws; ++t) {
        sample_simplex(rng, row);
        mean += row[0];
        below += row[0] < 0.5;
    }
    EXPECT_NEAR(mean / draws, 1.0 / 3.0, 0.02);
    EXPECT_NEAR(static_cast<double>(below) / draws, 0.75, 0.02);
}

TEST(RandomSolution, EveryKIsReachable)
{
    Rng rng(5);
    std::vector<int> seen(5, 0);
    for (int t = 0; t < 1000; ++t) {
        seen[random_solution(rng, 2, 4).k] += 1;
    }
    EXPECT_EQ(seen[0], 0);
    for (std::size_t k = 1; k <= 4; ++k) {
        EXPECT_GT(seen[k], 150) << "k=" << k;
    }
}

TEST(NeighborhoodMove, VanishingRadiusKeepsTheSolution)
{
    Rng rng(1);
    auto s = random_solution(rng, 4, 5);
    auto moved = neighborhood_move(rng, s, 1e-12);
    ASSERT_EQ(moved.k, s.k);
    for (std::size_t i = 0; i < s.weights.size(); ++i) {
        EXPECT_NEAR(moved.weights[i], s.weights[i], 1e-9);
    }
}

TEST(NeighborhoodMove, SingleFeatureStaysOne)
{
    Rng rng(3);
    auto s = matrix(2, 1, {1.0, 1.0});
    for (double radius : {0.01, 0.5, 10.0}) {
        auto moved = neighborhood_move(rng, s, radius);
        EXPECT_EQ(moved.weights, (std::vector<double>{1.0, 1.0}));
    }
}

TEST(NeighborhoodMove, BoundedByIntervalArithmetic)
{
    // (0.5, 0.5) perturbed by at most 0.05 per entry and renormalised lies in
    // [0.45 / 1.05, 0.55 / 0.95] = [0.4286, 0.5790].
    Rng rng(17);
    auto s = matrix(1, 2, {0.5, 0.5});
    for (int t = 0; t < 5000; ++t) {
        auto moved = neighborhood_move(rng, s, 0.05);
        for (double w : moved.weights) {
            EXPECT_GE(w, 0.428);
            EXPECT_LE(w, 0.579);
        }
        EXPECT_TRUE(moved.is_valid());
    }
}

TEST(NeighborhoodMove, ResultsStayOnTheSimplex)
{
    Rng rng(8);
    for (int t = 0; t < 500; ++t) {
        auto s = random_solution(rng, 5, 6);
        auto moved = neighborhood_move(rng, s, 0.8);
        EXPECT_EQ(moved.k, s.k);
        EXPECT_TRUE(moved.is_valid(1e-9));
    }
}

TEST(Run, FindsAKnownOptimum)
{
    const std::vector<double> c{0.2, 0.5, 0.3};
    BeesConfig config;
    config.k_max = 10;
    config.seed = 4;
    auto f = known_optimum(c, 3, config.k_max);
    auto result = run(config, on_solution(f), 3);
    EXPECT_LE(*result.best.fitness, 0.05);
    EXPECT_EQ(result.best.k, 3u);
    EXPECT_TRUE(result.best.is_valid());
}

TEST(Run, ConstantZeroStopsAtOnce)
{
    BeesConfig config;
    config.k_max = 4;
    auto result = run(config, [](const CandidateSolution&) { return 0.0; }, 3);
    EXPECT_EQ(result.iterations, 1u);
    ASSERT_EQ(result.trace.size(), 1u);
    EXPECT_EQ(result.trace[0], 0.0);
    EXPECT_EQ(*result.best.fitness, 0.0);
}

TEST(Run, StagnationEndsTheSearch)
{
    BeesConfig config;
    config.k_max = 3;
    config.stagnation_limit = 5;
    auto result = run(config, [](const CandidateSolution&) { return 1.0; }, 2);
    EXPECT_EQ(result.iterations, 5u);
}

TEST(Run, SameSeedSameResult)
{
    BeesConfig config;
    config.k_max = 6;
    config.seed = 1234;
    config.max_iterations = 30;
    auto f = on_solution(known_optimum({0.1, 0.6, 0.3}, 2, 6));
    auto a = run(config, f, 3);
    auto b = run(config, f, 3);
    EXPECT_EQ(a.best.k, b.best.k);
    EXPECT_EQ(a.best.weights, b.best.weights);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Run, TraceIsMonotoneAndObserverSeesOnlyValidSolutions)
{
    BeesConfig config;
    config.k_max = 5;
    config.seed = 77;
    config.max_iterations = 40;
    std::size_t observed = 0;
    bool all_valid = true;
    auto result = run(
        config, on_solution(known_optimum({0.25, 0.25, 0.5}, 4, 5)), 3,
        [&](const CandidateSolution& s, double f) {
            ++observed;
            all_valid = all_valid && s.is_valid() && s.k >= 1 && s.k <= 5 && f >= 0.0;
        });
    EXPECT_TRUE(all_valid);
    EXPECT_EQ(observed, result.evaluations);
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
        EXPECT_LE(result.trace[i], result.trace[i - 1]);
    }
    EXPECT_EQ(result.trace.back(), *result.best.fitness);
}

TEST(Run, MatchesGridSearchOnSmallProblems)
{
    // Off-grid optima: the continuous search must reach the best grid point.
    boost::random::mt19937 rng(31);
    boost::random::uniform_real_distribution<double> u(0.05, 0.95);
    int matched = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        double c0 = u(rng);
        std::vector<double> c{c0, 1.0 - c0};
        std::size_t target_k = 1 + static_cast<std::size_t>(t % 3);
        auto f = known_optimum(c, target_k, 3);
        double grid = oabe::testing::grid_minimum(2, 3, 0.05, f);

        BeesConfig config;
        config.k_max = 3;
        config.seed = static_cast<std::uint64_t>(t);
        auto result = run(config, on_solution(f), 2);
        if (*result.best.fitness <= grid + 1e-9) {
            ++matched;
        }
    }
    EXPECT_GE(matched, 19);
}

TEST(BoxSpace, StaysInTheBox)
{
    BoxSpace box{3, -1.0, 1.0};
    Rng rng(12);
    for (int t = 0; t < 1000; ++t) {
        auto p = box.random(rng);
        auto q = box.neighbor(rng, p, 0.5);
        ASSERT_EQ(q.size(), 3u);
        for (double v : q) {
            EXPECT_GE(v, -1.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(BeesSearch, MinimisesAQuadraticInABox)
{
    BoxSpace box{2, -1.0, 1.0};
    BeesConfig config;
    config.seed = 9;
    config.fitness_epsilon = 0.0;
    auto result = bees_search(
        box, [](const std::vector<double>& p) { return (p[0] - 0.3) * (p[0] - 0.3) + (p[1] + 0.6) * (p[1] + 0.6); },
        config);
    EXPECT_NEAR(result.best[0], 0.3, 1e-2);
    EXPECT_NEAR(result.best[1], -0.6, 1e-2);
}
