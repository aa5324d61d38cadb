#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oabe {

enum class Measure { Mre, Mmre, Mdmre, Mmer, Mbre, Pred25 };

inline constexpr std::array<Measure, 6> kAllMeasures{Measure::Mre,  Measure::Mmre, Measure::Mdmre,
                                                     Measure::Mmer, Measure::Mbre, Measure::Pred25};

std::string_view measure_name(Measure measure);
std::optional<Measure> parse_measure(std::string_view name);

/// Accuracy of one method on one dataset. Ratio measures are in percent.
struct MetricReport {
    std::string method;
    std::string dataset;
    std::vector<double> mre;        // fractions, one per project
    std::vector<double> abs_errors; // |actual - predicted|, raw units
    double mmre = 0.0;
    double mdmre = 0.0;
    double mmer = 0.0;
    double mbre = 0.0;
    double pred25 = 0.0;

    /// Scalar value of a measure. Mre has no scalar and throws.
    double value(Measure measure) const;
};

/// Throws std::invalid_argument on empty or mismatched inputs or non-positive values.
MetricReport metrics(std::span<const double> actual, std::span<const double> predicted);

struct WilcoxonResult {
    double statistic = 0.0; // W+, the sum of ranks of positive differences
    double p_value = 1.0;   // two-sided
    std::size_t n = 0;      // pairs left after dropping zero differences
    bool exact = true;
};

/// Two-sided Wilcoxon signed-rank test on x - y. Zero differences are
/// dropped and tied magnitudes share their average rank. Up to 25 pairs the
/// null distribution is enumerated exactly (conditional on the tie pattern);
/// above that a normal approximation with tie and continuity corrections is used.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

/// True when the test cannot reject equality at the given confidence.
bool wilcoxon_same(std::span<const double> x, std::span<const double> y, double confidence = 0.95);

struct Tally {
    std::size_t win = 0;
    std::size_t tie = 0;
    std::size_t loss = 0;

    std::size_t total() const noexcept { return win + tie + loss; }
    bool operator==(const Tally&) const = default;
};

/// Whether method i beats method j on `measure` (Pred25 higher is better,
/// everything else lower). For the Mre vector, i is better when it has the
/// smaller error on more projects.
bool better(const MetricReport& i, const MetricReport& j, Measure measure);

/// One win-tie-loss comparison. Both reports must cover the same projects in
/// the same order. The significance gate always compares the MRE vectors.
void win_tie_loss(const MetricReport& i, const MetricReport& j, Measure measure, Tally& tally_i, Tally& tally_j);

/// Mean rank of each method when methods are ranked per project by absolute
/// error (1 = smallest; ties share the average rank). `abs_errors[m][p]`.
std::vector<double> rank_summary(const std::vector<std::vector<double>>& abs_errors);

} // namespace oabe
