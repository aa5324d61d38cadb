#include "oabe/optimizer.hpp"

#include "oabe/errors.hpp"

#include <cmath>
#include <numeric>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

namespace oabe {

void BeesConfig::validate() const
{
    if (scouts == 0 || sites == 0 || elite_sites == 0 || elite_recruits == 0 || site_recruits == 0) {
        throw ParameterError("bees: population counts must be positive");
    }
    if (!(elite_sites <= sites && sites <= scouts)) {
        throw ParameterError(
            fmt::format("bees: need b <= u <= n, got b={} u={} n={}", elite_sites, sites, scouts));
    }
    if (!(patch_radius > 0.0 && patch_radius < 1.0)) {
        throw ParameterError(fmt::format("bees: patch radius {} outside (0, 1)", patch_radius));
    }
    if (!(patch_shrink > 0.0 && patch_shrink <= 1.0)) {
        throw ParameterError(fmt::format("bees: patch shrink {} outside (0, 1]", patch_shrink));
    }
    if (!(fitness_epsilon >= 0.0)) {
        throw ParameterError("bees: fitness epsilon must be non-negative");
    }
    if (k_max < 1) {
        throw ParameterError("bees: k_max must be at least 1");
    }
}

void BeesConfig::validate(std::size_t train_size) const
{
    validate();
    if (k_max > train_size) {
        throw ParameterError(fmt::format("bees: k_max {} exceeds training size {}", k_max, train_size));
    }
}

std::size_t default_k_max(std::size_t train_size)
{
    if (train_size <= 1) {
        return 1;
    }
    return std::min<std::size_t>(10, train_size - 1);
}

bool CandidateSolution::is_valid(double tolerance) const
{
    if (k < 1 || features < 1 || weights.size() != k * features) {
        return false;
    }
    for (std::size_t i = 0; i < k; ++i) {
        auto r = row(i);
        double sum = 0.0;
        for (double w : r) {
            if (!(w >= 0.0)) {
                return false;
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > tolerance) {
            return false;
        }
    }
    return true;
}

void sample_simplex(Rng& rng, std::span<double> row)
{
    if (row.size() == 1) {
        row[0] = 1.0;
        return;
    }
    boost::random::exponential_distribution<double> exponential(1.0);
    double sum = 0.0;
    do {
        sum = 0.0;
        for (auto& w : row) {
            w = exponential(rng);
            sum += w;
        }
    } while (!(sum > 0.0));
    for (auto& w : row) {
        w /= sum;
    }
}

CandidateSolution random_solution(Rng& rng, std::size_t m, std::size_t k_max)
{
    if (m < 1 || k_max < 1) {
        throw ParameterError("random_solution: m and k_max must be at least 1");
    }
    boost::random::uniform_int_distribution<std::size_t> pick_k(1, k_max);
    CandidateSolution s;
    s.k = pick_k(rng);
    s.features = m;
    s.weights.resize(s.k * m);
    for (std::size_t i = 0; i < s.k; ++i) {
        sample_simplex(rng, s.row(i));
    }
    return s;
}

CandidateSolution neighborhood_move(Rng& rng, const CandidateSolution& s, double radius)
{
    CandidateSolution out = s;
    out.fitness.reset();
    if (s.features == 1) {
        return out;
    }
    boost::random::uniform_real_distribution<double> noise(-radius, radius);
    for (std::size_t i = 0; i < out.k; ++i) {
        auto r = out.row(i);
        double sum = 0.0;
        for (auto& w : r) {
            w = std::max(0.0, w + noise(rng));
            sum += w;
        }
        if (sum > 0.0) {
            for (auto& w : r) {
                w /= sum;
            }
        } else {
            sample_simplex(rng, r);
        }
    }
    return out;
}

BoxSpace::Point BoxSpace::random(Rng& rng) const
{
    boost::random::uniform_real_distribution<double> uniform(lower, upper);
    Point p(dims);
    for (auto& x : p) {
        x = uniform(rng);
    }
    return p;
}

BoxSpace::Point BoxSpace::neighbor(Rng& rng, const Point& p, double radius) const
{
    double width = radius * (upper - lower);
    boost::random::uniform_real_distribution<double> noise(-width, width);
    Point q = p;
    for (auto& x : q) {
        x = std::clamp(x + noise(rng), lower, upper);
    }
    return q;
}

OptimizerResult run(const BeesConfig& config, const FitnessFunction& fitness, std::size_t m,
                    const SolutionObserver& observer)
{
    WeightMatrixSpace space{m, config.k_max};
    auto observe = [&](const CandidateSolution& s, double f) {
        if (observer) {
            observer(s, f);
        }
    };
    auto found = bees_search(space, fitness, config, observe);
    OptimizerResult result;
    result.best = std::move(found.best);
    result.best.fitness = found.best_fitness;
    result.trace = std::move(found.trace);
    result.iterations = found.iterations;
    result.evaluations = found.evaluations;
    return result;
}

} // namespace oabe
