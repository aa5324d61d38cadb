#include "oabe/errors.hpp"
#include "oabe/estimators.hpp"
#include "oabe/evaluation.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cmath>

using namespace oabe;
using oabe::testing::numeric_dataset;
using oabe::testing::numeric_schema;
using oabe::testing::project;
using oabe::testing::training_set;

namespace {

Target target_for(const TrainingSet& train, std::vector<double> features, double effort = 1.0)
{
    return train.target(project(1000, std::move(features), effort));
}

FeatureSchema two_size_schema()
{
    auto schema = numeric_schema(2);
    schema.size_columns = {"f1", "f2"};
    return schema;
}

double loocv_mmre(const Dataset& d, const std::function<EstimationRecord(const Split&)>& estimator)
{
    std::vector<double> actual, predicted;
    for (const auto& split : loocv_splits(d)) {
        actual.push_back(split.test.raw.effort);
        predicted.push_back(estimator(split).estimate);
    }
    return metrics(actual, predicted).mmre;
}

} // namespace

TEST(Methods, NamesRoundTrip)
{
    for (auto m : kAllMethods) {
        EXPECT_EQ(parse_method(method_name(m)), m);
    }
    EXPECT_FALSE(parse_method("knn"));
    EXPECT_EQ(method_names(), "oabe, abe, lse, mlfe, rtm, ga");
}

TEST(Delta, IdenticalProjectsGiveZero)
{
    auto schema = numeric_schema(3);
    auto p = project(0, {0.3, 0.9, 0.1});
    EXPECT_EQ(delta(p, p, std::vector<double>{0.2, 0.5, 0.3}, schema), 0.0);
}

TEST(Delta, HandEvaluatedCases)
{
    // (1/2)(0.5 * 0.4 + 0.5 * 0.4) = 0.2
    auto schema2 = numeric_schema(2);
    EXPECT_NEAR(delta(project(0, {0.8, 0.6}), project(1, {0.4, 0.2}), std::vector<double>{0.5, 0.5}, schema2),
                0.2, 1e-15);
    EXPECT_NEAR(delta(project(0, {0.6, 0.4}), project(1, {0.4, 0.2}), std::vector<double>{0.5, 0.5}, schema2),
                0.1, 1e-15);
    auto schema1 = numeric_schema(1);
    EXPECT_EQ(delta(project(0, {0.0}), project(1, {1.0}), std::vector<double>{1.0}, schema1), -1.0);
}

TEST(Delta, CategoricalFeaturesContributeNothing)
{
    auto schema = numeric_schema(2);
    schema.feature_kinds[1] = FeatureKind::Categorical;
    EXPECT_NEAR(delta(project(0, {0.8, 3}), project(1, {0.4, 0}), std::vector<double>{0.5, 0.5}, schema), 0.1,
                1e-15);
}

TEST(Delta, DimensionMismatch)
{
    auto schema = numeric_schema(2);
    EXPECT_THROW(delta(project(0, {0.8, 0.6}), project(1, {0.4, 0.2}), std::vector<double>{1.0}, schema),
                 DimensionError);
}

TEST(Adjust, HandEvaluatedCases)
{
    EXPECT_DOUBLE_EQ(adjust(0.3, 0.2), 0.5);
    EXPECT_EQ(adjust(0.3, 0.0), 0.3);
    EXPECT_EQ(adjust(0.95, 0.8), 1.5);
    EXPECT_EQ(adjust(0.1, -0.4), 0.0);
}

TEST(Aggregate, HandEvaluatedCases)
{
    EXPECT_EQ(aggregate(std::vector<double>{42}), 42.0);
    EXPECT_DOUBLE_EQ(aggregate(std::vector<double>{10, 20, 30}), 100.0 / 6.0);
    for (std::size_t k = 1; k <= 10; ++k) {
        EXPECT_NEAR(aggregate(std::vector<double>(k, 0.37)), 0.37, 1e-15);
    }
    EXPECT_THROW(aggregate(std::vector<double>{}), ParameterError);
}

TEST(MrFitness, HandEvaluatedCase)
{
    // Two analogies, one feature, weight 1: deltas are the plain gaps.
    auto schema = numeric_schema(1);
    auto train = training_set(schema, {{0.0, 10}, {0.4, 20}, {1.0, 30}});
    auto target = project(9, {0.3});
    CandidateSolution s{2, 1, {1.0, 1.0}, std::nullopt};
    // analogies: 0.4 (gap -0.1) then 0.0 (gap +0.3)
    EXPECT_NEAR(mr_fitness(target, train, s), 0.2, 1e-15);
}

TEST(MrFitness, ZeroForDuplicatesAndNonNegative)
{
    auto schema = numeric_schema(2);
    auto train = training_set(schema, {{0.5, 0.5, 10}, {0.5, 0.5, 12}, {0.0, 1.0, 30}, {1.0, 0.0, 5}});
    CandidateSolution two{2, 2, {0.7, 0.3, 0.1, 0.9}, std::nullopt};
    EXPECT_EQ(mr_fitness(project(9, {0.5, 0.5}), train, two), 0.0);

    boost::random::mt19937 rng(4);
    boost::random::uniform_real_distribution<double> u(-0.5, 1.5);
    Rng bees(4);
    for (int t = 0; t < 200; ++t) {
        auto s = random_solution(bees, 2, 4);
        EXPECT_GE(mr_fitness(project(9, {u(rng), u(rng)}), train, s), 0.0);
    }
}

TEST(MeanGapObjective, AgreesWithMrFitness)
{
    boost::random::mt19937 rng(10);
    boost::random::uniform_real_distribution<double> u(0, 100);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 15; ++i) {
        rows.push_back({u(rng), u(rng), u(rng), 1 + u(rng)});
    }
    auto train = training_set(numeric_schema(3), rows);
    auto target = target_for(train, {u(rng), u(rng), u(rng)});
    auto analogs = retrieve(target.scaled, train.scaled(), train.schema(), 10);
    MeanGapObjective objective(target.scaled, train, analogs);
    Rng bees(1);
    for (int t = 0; t < 200; ++t) {
        auto s = random_solution(bees, 3, 10);
        EXPECT_NEAR(objective(s), mr_fitness(target.scaled, train, s), 1e-14);
    }
}

TEST(Abe, HandEvaluatedCases)
{
    auto schema = numeric_schema(1);
    auto train = training_set(schema, {{10, 120}, {30, 100}, {31, 200}, {90, 900}});
    EXPECT_EQ(estimate_abe_fixed(target_for(train, {11}), train, 1).estimate, 120.0);
    EXPECT_EQ(estimate_abe_fixed(target_for(train, {30.6}), train, 2).estimate, 150.0);
    auto record = estimate_abe_fixed(target_for(train, {30.6}), train, 2);
    EXPECT_EQ(record.k, 2u);
    EXPECT_EQ(record.neighbors.size(), 2u);
    EXPECT_EQ(record.deltas, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(record.adjusted.size(), 2u);
}

TEST(Abe, DuplicatesOfTheTargetReturnItsEffort)
{
    auto schema = numeric_schema(2);
    auto train = training_set(schema, {{5, 5, 70}, {5, 5, 70}, {9, 1, 300}, {1, 9, 40}});
    EXPECT_EQ(estimate_abe_fixed(target_for(train, {5, 5}), train, 2).estimate, 70.0);
}

TEST(Lse, HandEvaluatedCases)
{
    auto schema = numeric_schema(1);
    auto one = training_set(schema, {{50, 100}, {10, 20}, {200, 500}});
    EXPECT_DOUBLE_EQ(estimate_lse(target_for(one, {60}), one, 1).estimate, 120.0);
    EXPECT_DOUBLE_EQ(estimate_lse(target_for(one, {50}), one, 1).estimate,
                     estimate_abe_fixed(target_for(one, {50}), one, 1).estimate);

    auto two = training_set(schema, {{50, 100}, {100, 200}, {300, 900}});
    EXPECT_DOUBLE_EQ(estimate_lse(target_for(two, {50}), two, 2).estimate, 100.0);
}

TEST(Lse, NeedsASizeColumn)
{
    auto schema = numeric_schema(1);
    schema.size_columns.clear();
    auto train = training_set(schema, {{50, 100}, {10, 20}, {200, 500}});
    EXPECT_THROW(estimate_lse(target_for(train, {60}), train, 1), ValidationError);
}

TEST(Lse, NonPositiveAnalogSizeFallsBackToAnalogy)
{
    auto schema = numeric_schema(1);
    auto train = training_set(schema, {{0, 100}, {10, 20}, {200, 500}});
    auto record = estimate_lse(target_for(train, {1}), train, 1);
    EXPECT_TRUE(record.fallback);
    EXPECT_EQ(record.method, Method::Lse);
    EXPECT_EQ(record.estimate, 100.0);
}

TEST(Mlfe, HandEvaluatedCases)
{
    auto schema = two_size_schema();
    auto train = training_set(schema, {{50, 100, 100}, {200, 10, 300}, {300, 300, 50}});
    // ratios 60/50 = 1.2 and 80/100 = 0.8
    EXPECT_DOUBLE_EQ(estimate_mlfe(target_for(train, {60, 80}), train, 1).estimate, 100.0);
    EXPECT_DOUBLE_EQ(estimate_mlfe(target_for(train, {50, 100}), train, 1).estimate, 100.0);
}

TEST(Mlfe, OneSizeColumnEqualsLse)
{
    boost::random::mt19937 rng(6);
    boost::random::uniform_real_distribution<double> u(1, 100);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) {
        rows.push_back({u(rng), u(rng), u(rng) * 10});
    }
    auto train = training_set(numeric_schema(2), rows);
    for (int t = 0; t < 20; ++t) {
        auto target = target_for(train, {u(rng), u(rng)});
        for (std::size_t k = 1; k <= 5; ++k) {
            EXPECT_DOUBLE_EQ(estimate_mlfe(target, train, k).estimate, estimate_lse(target, train, k).estimate);
        }
    }
}

TEST(Rtm, HandEvaluatedCases)
{
    // productivities 2, 4 and 3: mean 3
    auto schema = numeric_schema(1);
    auto train = training_set(schema, {{10, 20}, {100, 400}, {50, 150}});
    auto target = target_for(train, {10});
    EXPECT_DOUBLE_EQ(estimate_rtm(target, train, 1, 0.5).estimate, 25.0);
    EXPECT_DOUBLE_EQ(estimate_rtm(target, train, 1, 1.0).estimate, estimate_lse(target, train, 1).estimate);
    EXPECT_DOUBLE_EQ(estimate_rtm(target, train, 1, 0.0).estimate, 30.0);
    EXPECT_DOUBLE_EQ(estimate_rtm(target, train, 3, 0.0).estimate, 30.0);
    EXPECT_THROW(estimate_rtm(target, train, 1, 1.5), ParameterError);
}

TEST(Rtm, FullStrengthEqualsLse)
{
    boost::random::mt19937 rng(8);
    boost::random::uniform_real_distribution<double> u(1, 100);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) {
        rows.push_back({u(rng), u(rng), u(rng) * 10});
    }
    auto train = training_set(numeric_schema(2), rows);
    for (int t = 0; t < 20; ++t) {
        auto target = target_for(train, {u(rng), u(rng)});
        for (std::size_t k = 1; k <= 5; ++k) {
            EXPECT_NEAR(estimate_rtm(target, train, k, 1.0).estimate, estimate_lse(target, train, k).estimate, 1e-9);
        }
    }
}

TEST(Oabe, DuplicateIsReturned)
{
    auto schema = numeric_schema(2);
    auto train = training_set(schema, {{5, 5, 70}, {9, 1, 300}, {1, 9, 40}, {2, 3, 55}, {8, 8, 500}});
    BeesConfig config;
    config.k_max = 4;
    config.seed = 3;
    auto record = estimate_oabe(target_for(train, {5, 5}), train, config);
    auto span = 500.0 - 40.0;
    EXPECT_NEAR(record.estimate, 70.0, 1e-6 * span);
    EXPECT_EQ(record.k, 1u);
    EXPECT_EQ(record.neighbors.size(), record.k);
    EXPECT_EQ(record.deltas.size(), record.k);
    EXPECT_EQ(record.adjusted.size(), record.k);
    EXPECT_EQ(record.weights.size(), record.k * 2);
    EXPECT_FALSE(record.optimizer_trace.empty());
}

TEST(Oabe, SameSeedSameRecord)
{
    boost::random::mt19937 rng(12);
    boost::random::uniform_real_distribution<double> u(1, 100);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) {
        rows.push_back({u(rng), u(rng), u(rng), u(rng) * 10});
    }
    auto train = training_set(numeric_schema(3), rows);
    auto target = target_for(train, {40, 50, 60});
    BeesConfig config;
    config.seed = 2;
    auto a = estimate_oabe(target, train, config);
    auto b = estimate_oabe(target, train, config);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.k, b.k);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.optimizer_trace, b.optimizer_trace);
    EXPECT_GT(a.estimate, 0.0);
}

TEST(Oabe, BeatsWideFixedAnalogyOnALinearRelation)
{
    std::vector<std::vector<double>> rows;
    boost::random::mt19937 rng(21);
    boost::random::uniform_real_distribution<double> u(1, 50);
    for (int i = 0; i < 20; ++i) {
        double f = std::round(u(rng) * 100) / 100;
        rows.push_back({f, 10 * f});
    }
    auto d = numeric_dataset(rows);
    BeesConfig config;
    config.seed = 5;
    double oabe = loocv_mmre(d, [&](const Split& s) {
        auto c = config;
        c.k_max = default_k_max(s.train.size());
        return estimate_oabe(s.test, s.train, c);
    });
    double abe = loocv_mmre(d, [](const Split& s) { return estimate_abe_fixed(s.test, s.train, 5); });
    EXPECT_LE(oabe, abe);
}

TEST(Ga, ZeroCoefficientsGivePlainAnalogy)
{
    boost::random::mt19937 rng(14);
    boost::random::uniform_real_distribution<double> u(1, 100);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 15; ++i) {
        rows.push_back({u(rng), u(rng), u(rng) * 10});
    }
    auto train = training_set(numeric_schema(2), rows);
    for (int t = 0; t < 20; ++t) {
        auto target = target_for(train, {u(rng), u(rng)});
        for (std::size_t k = 1; k <= 4; ++k) {
            EXPECT_NEAR(estimate_ga_adjusted(target, train, k, std::vector<double>{0.0, 0.0}).estimate,
                        estimate_abe_fixed(target, train, k).estimate, 1e-9);
        }
    }
}

TEST(Ga, DuplicatesIgnoreTheCoefficients)
{
    auto schema = numeric_schema(2);
    auto train = training_set(schema, {{5, 5, 70}, {9, 1, 300}, {1, 9, 40}});
    for (double a : {-1.0, 0.3, 1.0}) {
        EXPECT_NEAR(estimate_ga_adjusted(target_for(train, {5, 5}), train, 1, std::vector<double>{a, -a}).estimate,
                    70.0, 1e-9);
    }
}

TEST(Ga, FitRecoversFullGapCompensation)
{
    // effort = 100 + 50 f so normalised effort equals the scaled feature.
    std::vector<std::vector<double>> rows;
    boost::random::mt19937 rng(19);
    boost::random::uniform_real_distribution<double> u(0, 20);
    for (int i = 0; i < 15; ++i) {
        double f = u(rng);
        rows.push_back({f, 100 + 50 * f});
    }
    auto train = training_set(numeric_schema(1), rows);

    // inner leave-one-out with k = 1, recomputed directly
    auto brute_mmre = [&](double alpha) {
        const auto& p = train.raw();
        double lo = p[0].features[0], hi = lo, emin = p[0].effort, emax = emin;
        for (const auto& q : p) {
            lo = std::min(lo, q.features[0]);
            hi = std::max(hi, q.features[0]);
            emin = std::min(emin, q.effort);
            emax = std::max(emax, q.effort);
        }
        double total = 0;
        for (std::size_t t = 0; t < p.size(); ++t) {
            std::size_t best = t == 0 ? 1 : 0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (i != t && std::abs(p[i].features[0] - p[t].features[0]) <
                                  std::abs(p[best].features[0] - p[t].features[0])) {
                    best = i;
                }
            }
            double gap = (p[t].features[0] - p[best].features[0]) / (hi - lo);
            double norm = (p[best].effort - emin) / (emax - emin) + alpha * gap;
            double raw = std::max(emin + norm * (emax - emin), 0.1 * emin);
            total += std::abs(p[t].effort - raw) / p[t].effort;
        }
        return total / static_cast<double>(p.size());
    };

    double grid_best = 1e9, grid_alpha = 0;
    for (int i = -20; i <= 20; ++i) {
        double alpha = i * 0.05;
        if (brute_mmre(alpha) < grid_best) {
            grid_best = brute_mmre(alpha);
            grid_alpha = alpha;
        }
    }
    EXPECT_NEAR(grid_alpha, 1.0, 1e-12);
    EXPECT_LT(grid_best, 1e-12);

    auto config = coefficient_search_defaults();
    config.seed = 7;
    auto fitted = fit_ga_coefficients(train, 1, config);
    ASSERT_EQ(fitted.size(), 1u);
    EXPECT_NEAR(fitted[0], 1.0, 0.05);
    double fitted_mmre = ga_training_mmre(train, 1, fitted);
    EXPECT_NEAR(fitted_mmre, brute_mmre(fitted[0]), 1e-12);
    EXPECT_LE(fitted_mmre, grid_best + 0.01);
}

TEST(Estimate, DispatchesEveryMethod)
{
    boost::random::mt19937 rng(3);
    boost::random::uniform_real_distribution<double> u(1, 100);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 12; ++i) {
        rows.push_back({u(rng), u(rng), u(rng) * 10});
    }
    auto train = training_set(numeric_schema(2), rows);
    auto target = target_for(train, {50, 50});
    EstimatorOptions options;
    options.bees.k_max = 5;
    for (auto m : kAllMethods) {
        auto record = estimate(m, target, train, 3, options, 11);
        EXPECT_EQ(record.method, m);
        EXPECT_GT(record.estimate, 0.0);
        EXPECT_TRUE(std::isfinite(record.estimate));
        EXPECT_EQ(record.neighbors.size(), record.k);
        if (m != Method::Oabe) {
            EXPECT_EQ(record.k, 3u);
        }
    }
    EXPECT_EQ(estimate(Method::Abe, target, train, 3, options, 0).estimate,
              estimate_abe_fixed(target, train, 3).estimate);
}

TEST(Estimate, EstimatesNeverDropBelowTheFloor)
{
    // a target far below every analogy pushes adjusted efforts to the clamp
    auto schema = numeric_schema(1);
    auto train = training_set(schema, {{50, 100}, {60, 200}, {70, 300}});
    auto target = target_for(train, {1});
    EstimatorOptions options;
    options.bees.k_max = 3;
    options.ga_coefficients = std::vector<double>{1.0};
    for (auto m : kAllMethods) {
        auto record = estimate(m, target, train, 1, options, 1);
        EXPECT_GE(record.estimate, 10.0) << method_name(m);
    }
}
