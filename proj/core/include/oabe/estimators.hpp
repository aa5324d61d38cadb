#pragma once

#include "oabe/dataset.hpp"
#include "oabe/optimizer.hpp"
#include "oabe/similarity.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oabe {

enum class Method { Oabe, Abe, Lse, Mlfe, Rtm, Ga };

inline constexpr std::array<Method, 6> kAllMethods{Method::Oabe, Method::Abe, Method::Lse,
                                                   Method::Mlfe, Method::Rtm, Method::Ga};

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
/// Comma-separated list of every method name.
std::string method_names();

/// Min-max normalisation of the training efforts.
struct EffortNormalizer {
    double min = 0.0;
    double max = 1.0;

    static EffortNormalizer fit(std::span<const Project> train);
    double span() const noexcept { return max > min ? max - min : 1.0; }
    double normalize(double effort) const noexcept { return (effort - min) / span(); }
    double denormalize(double value) const noexcept { return min + value * span(); }
    /// Lowest raw estimate any method may return: a tenth of the training minimum.
    double floor() const noexcept { return 0.1 * min; }
};

struct EstimationRecord {
    std::size_t target_id = 0;
    Method method = Method::Abe;
    std::size_t k = 0;
    std::vector<Neighbor> neighbors;
    std::vector<double> weights; // row-major k x m for OABE, the m coefficients for GA, else empty
    /// Per analogy, in normalised effort units. NaN marks an analogy a
    /// size-based method had to skip.
    std::vector<double> deltas;
    std::vector<double> adjusted;
    double estimate = 0.0; // raw effort units
    std::vector<double> optimizer_trace;
    bool fallback = false; // size-based method fell back to plain analogy
};

/// Signed weighted feature gap between a target and one analogy:
/// (1/m) * sum_j w_j * (target_j - analog_j). Categorical features contribute 0.
double delta(const Project& target, const Project& analog, std::span<const double> row_weights,
             const FeatureSchema& schema);

/// Analog effort plus delta, clamped to [0, 1.5] normalised units.
double adjust(double analog_effort_norm, double d);

/// Rank-weighted mean: the analogy at rank r (1-based) of k gets weight k + 1 - r.
double aggregate(std::span<const double> adjusted_by_rank);

/// Mean absolute delta between a target and its s.k nearest analogies.
double mr_fitness(const Project& target_scaled, const TrainingSet& train, const CandidateSolution& s);

/// Same measure with pre-retrieved analogies (nearest first, at least s.k of them).
class MeanGapObjective {
public:
    MeanGapObjective(const Project& target_scaled, const TrainingSet& train, std::span<const Neighbor> analogs);

    double operator()(const CandidateSolution& s) const;

private:
    std::size_t features_;
    std::vector<double> gaps_; // row-major analog x feature, categorical gaps zeroed
    std::size_t analogs_;
};

/// Reduced search budget for the GA-style coefficient fit, which evaluates a
/// full inner leave-one-out pass per candidate.
BeesConfig coefficient_search_defaults();

struct EstimatorOptions {
    BeesConfig bees{};
    /// Search budget for fitting the GA-style coefficients.
    BeesConfig coefficient_bees = coefficient_search_defaults();
    double rtm_c = 0.5;
    /// Fixed GA coefficients; nullopt fits them on the training fold.
    std::optional<std::vector<double>> ga_coefficients;
};

EstimationRecord estimate_abe_fixed(const Target& target, const TrainingSet& train, std::size_t k);
EstimationRecord estimate_lse(const Target& target, const TrainingSet& train, std::size_t k);
EstimationRecord estimate_mlfe(const Target& target, const TrainingSet& train, std::size_t k);
EstimationRecord estimate_rtm(const Target& target, const TrainingSet& train, std::size_t k, double c);

/// Per-target OABE: searches (k, weights) minimising the mean gap, then
/// adjusts, aggregates and de-normalises. config.k_max is capped at |train|.
EstimationRecord estimate_oabe(const Target& target, const TrainingSet& train, const BeesConfig& config);

EstimationRecord estimate_ga_adjusted(const Target& target, const TrainingSet& train, std::size_t k,
                                      std::span<const double> coefficients);
/// Fits one coefficient vector in [-1,1]^m minimising the leave-one-out MMRE
/// of the GA-style adjustment inside the training set.
std::vector<double> fit_ga_coefficients(const TrainingSet& train, std::size_t k, const BeesConfig& config);
/// Leave-one-out MMRE (fraction, not percent) of the GA-style adjustment within `train`.
double ga_training_mmre(const TrainingSet& train, std::size_t k, std::span<const double> coefficients);

/// Dispatches on `method`. `k` is ignored by OABE; `seed` seeds its search
/// (and the coefficient fit of GA when the options ask for fitting).
EstimationRecord estimate(Method method, const Target& target, const TrainingSet& train, std::size_t k,
                          const EstimatorOptions& options, std::uint64_t seed);

} // namespace oabe
