#include "oabe/estimators.hpp"

#include "oabe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace oabe {

namespace {

constexpr double kAdjustedCeiling = 1.5;
const double kSkipped = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> values)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : values) {
        if (!std::isnan(v)) {
            sum += v;
            ++count;
        }
    }
    return count == 0 ? kSkipped : sum / static_cast<double>(count);
}

EstimationRecord start_record(Method method, const Target& target, std::vector<Neighbor> neighbors)
{
    EstimationRecord record;
    record.method = method;
    record.target_id = target.raw.id;
    record.k = neighbors.size();
    record.neighbors = std::move(neighbors);
    return record;
}

double finish(const EffortNormalizer& normalizer, double raw_estimate)
{
    return std::max(raw_estimate, normalizer.floor());
}

void require_size_column(const FeatureSchema& schema, std::string_view method)
{
    if (schema.size_indices().empty()) {
        throw ValidationError(fmt::format("{} needs at least one size column in schema '{}'", method, schema.name));
    }
}

// Shared body of the size-extrapolation baselines. `extrapolate` returns the
// raw adjusted effort of one analogy, or NaN to skip it.
template <class Extrapolate>
EstimationRecord size_adjusted(Method method, const Target& target, const TrainingSet& train, std::size_t k,
                               Extrapolate&& extrapolate)
{
    auto record = start_record(method, target, retrieve(target.scaled, train.scaled(), train.schema(), k));
    auto normalizer = EffortNormalizer::fit(train.raw());
    std::vector<double> raw_adjusted;
    for (const auto& n : record.neighbors) {
        const auto& analog = train.raw()[n.index];
        double value = extrapolate(analog);
        raw_adjusted.push_back(value);
        if (std::isnan(value)) {
            record.adjusted.push_back(kSkipped);
            record.deltas.push_back(kSkipped);
        } else {
            record.adjusted.push_back(normalizer.normalize(value));
            record.deltas.push_back(normalizer.normalize(value) - normalizer.normalize(analog.effort));
        }
    }
    double raw = mean_of(raw_adjusted);
    if (std::isnan(raw)) {
        auto plain = estimate_abe_fixed(target, train, k);
        plain.method = method;
        plain.fallback = true;
        return plain;
    }
    record.estimate = finish(normalizer, raw);
    return record;
}

} // namespace

std::string_view method_name(Method method)
{
    switch (method) {
    case Method::Oabe:
        return "oabe";
    case Method::Abe:
        return "abe";
    case Method::Lse:
        return "lse";
    case Method::Mlfe:
        return "mlfe";
    case Method::Rtm:
        return "rtm";
    case Method::Ga:
        return "ga";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name)
{
    for (auto m : kAllMethods) {
        if (method_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

std::string method_names()
{
    std::string out;
    for (auto m : kAllMethods) {
        if (!out.empty()) {
            out += ", ";
        }
        out += method_name(m);
    }
    return out;
}

EffortNormalizer EffortNormalizer::fit(std::span<const Project> train)
{
    if (train.empty()) {
        throw InsufficientDataError("effort normaliser needs at least one project");
    }
    EffortNormalizer n{train.front().effort, train.front().effort};
    for (const auto& p : train) {
        n.min = std::min(n.min, p.effort);
        n.max = std::max(n.max, p.effort);
    }
    return n;
}

double delta(const Project& target, const Project& analog, std::span<const double> row_weights,
             const FeatureSchema& schema)
{
    const auto m = schema.feature_count();
    if (target.features.size() != m || analog.features.size() != m || row_weights.size() != m) {
        throw DimensionError(fmt::format("delta: expected {} features and weights", m));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (!schema.is_categorical(j)) {
            sum += row_weights[j] * (target.features[j] - analog.features[j]);
        }
    }
    return sum / static_cast<double>(m);
}

double adjust(double analog_effort_norm, double d) { return std::clamp(analog_effort_norm + d, 0.0, kAdjustedCeiling); }

double aggregate(std::span<const double> adjusted_by_rank)
{
    if (adjusted_by_rank.empty()) {
        throw ParameterError("aggregate: no adjusted efforts");
    }
    const auto k = adjusted_by_rank.size();
    double numerator = 0.0;
    for (std::size_t r = 1; r <= k; ++r) {
        numerator += static_cast<double>(k + 1 - r) * adjusted_by_rank[r - 1];
    }
    return numerator / (static_cast<double>(k) * static_cast<double>(k + 1) / 2.0);
}

MeanGapObjective::MeanGapObjective(const Project& target_scaled, const TrainingSet& train,
                                   std::span<const Neighbor> analogs)
    : features_(train.schema().feature_count()), analogs_(analogs.size())
{
    const auto& schema = train.schema();
    gaps_.assign(analogs_ * features_, 0.0);
    for (std::size_t i = 0; i < analogs_; ++i) {
        const auto& analog = train.scaled()[analogs[i].index];
        for (std::size_t j = 0; j < features_; ++j) {
            if (!schema.is_categorical(j)) {
                gaps_[i * features_ + j] = target_scaled.features[j] - analog.features[j];
            }
        }
    }
}

double MeanGapObjective::operator()(const CandidateSolution& s) const
{
    if (s.k > analogs_ || s.features != features_) {
        throw DimensionError(fmt::format("mean gap: solution {}x{} does not fit {} analogies of {} features", s.k,
                                         s.features, analogs_, features_));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < s.k; ++i) {
        auto row = s.row(i);
        const double* gap = gaps_.data() + i * features_;
        double d = 0.0;
        for (std::size_t j = 0; j < features_; ++j) {
            d += row[j] * gap[j];
        }
        total += std::abs(d / static_cast<double>(features_));
    }
    return total / static_cast<double>(s.k);
}

double mr_fitness(const Project& target_scaled, const TrainingSet& train, const CandidateSolution& s)
{
    auto analogs = retrieve(target_scaled, train.scaled(), train.schema(), s.k);
    return MeanGapObjective(target_scaled, train, analogs)(s);
}

BeesConfig coefficient_search_defaults()
{
    BeesConfig config;
    config.scouts = 50;
    config.sites = 10;
    config.elite_sites = 5;
    config.elite_recruits = 20;
    config.site_recruits = 10;
    config.max_iterations = 50;
    config.stagnation_limit = 10;
    config.k_max = 1;
    return config;
}

EstimationRecord estimate_abe_fixed(const Target& target, const TrainingSet& train, std::size_t k)
{
    auto record = start_record(Method::Abe, target, retrieve(target.scaled, train.scaled(), train.schema(), k));
    auto normalizer = EffortNormalizer::fit(train.raw());
    double sum = 0.0;
    for (const auto& n : record.neighbors) {
        double effort = train.raw()[n.index].effort;
        sum += effort;
        record.adjusted.push_back(normalizer.normalize(effort));
        record.deltas.push_back(0.0);
    }
    record.estimate = finish(normalizer, sum / static_cast<double>(k));
    return record;
}

EstimationRecord estimate_lse(const Target& target, const TrainingSet& train, std::size_t k)
{
    require_size_column(train.schema(), "lse");
    const auto size = train.schema().size_indices().front();
    const double target_size = target.raw.features[size];
    return size_adjusted(Method::Lse, target, train, k, [&](const Project& analog) {
        double analog_size = analog.features[size];
        return analog_size > 0.0 ? analog.effort * target_size / analog_size : kSkipped;
    });
}

EstimationRecord estimate_mlfe(const Target& target, const TrainingSet& train, std::size_t k)
{
    require_size_column(train.schema(), "mlfe");
    const auto sizes = train.schema().size_indices();
    return size_adjusted(Method::Mlfe, target, train, k, [&](const Project& analog) {
        double sum = 0.0;
        std::size_t used = 0;
        for (auto j : sizes) {
            if (analog.features[j] > 0.0) {
                sum += analog.effort * target.raw.features[j] / analog.features[j];
                ++used;
            }
        }
        return used == 0 ? kSkipped : sum / static_cast<double>(used);
    });
}

EstimationRecord estimate_rtm(const Target& target, const TrainingSet& train, std::size_t k, double c)
{
    if (!(c >= 0.0 && c <= 1.0)) {
        throw ParameterError(fmt::format("rtm: c = {} outside [0, 1]", c));
    }
    require_size_column(train.schema(), "rtm");
    const auto size = train.schema().size_indices().front();
    double productivity_sum = 0.0;
    std::size_t counted = 0;
    for (const auto& p : train.raw()) {
        if (p.features[size] > 0.0) {
            productivity_sum += p.effort / p.features[size];
            ++counted;
        }
    }
    if (counted == 0) {
        throw ValidationError("rtm: no training project has a positive size");
    }
    const double mean_productivity = productivity_sum / static_cast<double>(counted);
    const double target_size = target.raw.features[size];
    return size_adjusted(Method::Rtm, target, train, k, [&](const Project& analog) {
        double analog_size = analog.features[size];
        if (!(analog_size > 0.0)) {
            return kSkipped;
        }
        double productivity = analog.effort / analog_size;
        double adjusted = productivity + (1.0 - c) * (mean_productivity - productivity);
        return adjusted * target_size;
    });
}

EstimationRecord estimate_oabe(const Target& target, const TrainingSet& train, const BeesConfig& config)
{
    const auto& schema = train.schema();
    BeesConfig search = config;
    search.k_max = std::min(config.k_max, train.size());
    auto analogs = retrieve(target.scaled, train.scaled(), schema, search.k_max);
    MeanGapObjective objective(target.scaled, train, analogs);
    auto found = run(search, std::cref(objective), schema.feature_count());

    const auto& best = found.best;
    analogs.resize(best.k);
    auto record = start_record(Method::Oabe, target, std::move(analogs));
    auto normalizer = EffortNormalizer::fit(train.raw());
    for (std::size_t i = 0; i < best.k; ++i) {
        const auto& analog = train.scaled()[record.neighbors[i].index];
        double d = delta(target.scaled, analog, best.row(i), schema);
        record.deltas.push_back(d);
        record.adjusted.push_back(adjust(normalizer.normalize(analog.effort), d));
    }
    record.weights = best.weights;
    record.estimate = finish(normalizer, normalizer.denormalize(aggregate(record.adjusted)));
    record.optimizer_trace = std::move(found.trace);
    return record;
}

EstimationRecord estimate_ga_adjusted(const Target& target, const TrainingSet& train, std::size_t k,
                                      std::span<const double> coefficients)
{
    const auto& schema = train.schema();
    if (coefficients.size() != schema.feature_count()) {
        throw DimensionError(fmt::format("ga: {} coefficients for {} features", coefficients.size(),
                                         schema.feature_count()));
    }
    auto record = start_record(Method::Ga, target, retrieve(target.scaled, train.scaled(), schema, k));
    auto normalizer = EffortNormalizer::fit(train.raw());
    for (const auto& n : record.neighbors) {
        const auto& analog = train.scaled()[n.index];
        double d = 0.0;
        for (std::size_t j = 0; j < schema.feature_count(); ++j) {
            if (!schema.is_categorical(j)) {
                d += coefficients[j] * (target.scaled.features[j] - analog.features[j]);
            }
        }
        record.deltas.push_back(d);
        record.adjusted.push_back(normalizer.normalize(analog.effort) + d);
    }
    record.weights.assign(coefficients.begin(), coefficients.end());
    record.estimate = finish(normalizer, normalizer.denormalize(mean_of(record.adjusted)));
    return record;
}

namespace {

// Inner leave-one-out view of a training set for the coefficient fit. The GA
// adjustment is linear in the coefficients, so each held-out project reduces
// to its mean analog effort plus the mean per-feature gap.
class InnerLoo {
public:
    InnerLoo(const TrainingSet& train, std::size_t k) : normalizer_(EffortNormalizer::fit(train.raw()))
    {
        const auto& schema = train.schema();
        const auto n = train.size();
        if (n < 2) {
            throw InsufficientDataError("ga: coefficient fit needs at least two training projects");
        }
        features_ = schema.feature_count();
        k = std::clamp<std::size_t>(k, 1, n - 1);
        std::vector<Project> others;
        others.reserve(n - 1);
        for (std::size_t q = 0; q < n; ++q) {
            others.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (i != q) {
                    others.push_back(train.scaled()[i]);
                }
            }
            const auto& held_out = train.scaled()[q];
            auto neighbors = retrieve(held_out, others, schema, k);
            double base = 0.0;
            std::vector<double> gap(features_, 0.0);
            for (const auto& nb : neighbors) {
                const auto& analog = others[nb.index];
                base += normalizer_.normalize(analog.effort);
                for (std::size_t j = 0; j < features_; ++j) {
                    if (!schema.is_categorical(j)) {
                        gap[j] += held_out.features[j] - analog.features[j];
                    }
                }
            }
            base_.push_back(base / static_cast<double>(k));
            for (double g : gap) {
                mean_gap_.push_back(g / static_cast<double>(k));
            }
            actual_.push_back(held_out.effort);
        }
    }

    double mmre(std::span<const double> coefficients) const
    {
        double total = 0.0;
        for (std::size_t q = 0; q < actual_.size(); ++q) {
            double norm = base_[q];
            for (std::size_t j = 0; j < features_; ++j) {
                norm += coefficients[j] * mean_gap_[q * features_ + j];
            }
            double predicted = std::max(normalizer_.denormalize(norm), normalizer_.floor());
            total += std::abs(actual_[q] - predicted) / actual_[q];
        }
        return total / static_cast<double>(actual_.size());
    }

private:
    EffortNormalizer normalizer_;
    std::size_t features_ = 0;
    std::vector<double> base_;
    std::vector<double> mean_gap_;
    std::vector<double> actual_;
};

} // namespace

double ga_training_mmre(const TrainingSet& train, std::size_t k, std::span<const double> coefficients)
{
    return InnerLoo(train, k).mmre(coefficients);
}

std::vector<double> fit_ga_coefficients(const TrainingSet& train, std::size_t k, const BeesConfig& config)
{
    InnerLoo inner(train, k);
    BoxSpace space{train.schema().feature_count(), -1.0, 1.0};
    BeesConfig search = config;
    search.k_max = 1;
    auto found = bees_search(space, [&](const std::vector<double>& alpha) { return inner.mmre(alpha); }, search);
    return found.best;
}

EstimationRecord estimate(Method method, const Target& target, const TrainingSet& train, std::size_t k,
                          const EstimatorOptions& options, std::uint64_t seed)
{
    switch (method) {
    case Method::Oabe: {
        BeesConfig config = options.bees;
        config.seed = seed;
        return estimate_oabe(target, train, config);
    }
    case Method::Abe:
        return estimate_abe_fixed(target, train, k);
    case Method::Lse:
        return estimate_lse(target, train, k);
    case Method::Mlfe:
        return estimate_mlfe(target, train, k);
    case Method::Rtm:
        return estimate_rtm(target, train, k, options.rtm_c);
    case Method::Ga: {
        if (options.ga_coefficients) {
            return estimate_ga_adjusted(target, train, k, *options.ga_coefficients);
        }
        BeesConfig config = options.coefficient_bees;
        config.seed = seed;
        auto alpha = fit_ga_coefficients(train, k, config);
        return estimate_ga_adjusted(target, train, k, alpha);
    }
    }
    throw ParameterError("unknown method");
}

} // namespace oabe
