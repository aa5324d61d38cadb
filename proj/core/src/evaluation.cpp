#include "oabe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace oabe {

namespace {

constexpr std::size_t kExactLimit = 25;

double median_of(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Average ranks (1-based) of `values`, ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

} // namespace

std::string_view measure_name(Measure measure)
{
    switch (measure) {
    case Measure::Mre:
        return "MRE";
    case Measure::Mmre:
        return "MMRE";
    case Measure::Mdmre:
        return "MdMRE";
    case Measure::Mmer:
        return "MMER";
    case Measure::Mbre:
        return "MBRE";
    case Measure::Pred25:
        return "Pred25";
    }
    return "unknown";
}

std::optional<Measure> parse_measure(std::string_view name)
{
    for (auto m : kAllMeasures) {
        if (measure_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

double MetricReport::value(Measure measure) const
{
    switch (measure) {
    case Measure::Mmre:
        return mmre;
    case Measure::Mdmre:
        return mdmre;
    case Measure::Mmer:
        return mmer;
    case Measure::Mbre:
        return mbre;
    case Measure::Pred25:
        return pred25;
    case Measure::Mre:
        break;
    }
    throw std::invalid_argument("the MRE measure is a vector; it has no scalar value");
}

MetricReport metrics(std::span<const double> actual, std::span<const double> predicted)
{
    if (actual.empty() || actual.size() != predicted.size()) {
        throw std::invalid_argument(
            fmt::format("metrics: need equal non-empty inputs, got {} and {}", actual.size(), predicted.size()));
    }
    MetricReport report;
    const auto n = actual.size();
    double mmer = 0.0;
    double mbre = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = actual[i];
        double p = predicted[i];
        if (!(a > 0.0) || !(p > 0.0)) {
            throw std::invalid_argument(fmt::format("metrics: non-positive value at {}", i));
        }
        double err = std::abs(a - p);
        double mre = err / a;
        report.abs_errors.push_back(err);
        report.mre.push_back(mre);
        mmer += err / p;
        mbre += err / std::min(a, p);
        if (mre <= 0.25) {
            ++hits;
        }
    }
    const double count = static_cast<double>(n);
    report.mmre = 100.0 * std::accumulate(report.mre.begin(), report.mre.end(), 0.0) / count;
    report.mdmre = 100.0 * median_of(report.mre);
    report.mmer = 100.0 * mmer / count;
    report.mbre = 100.0 * mbre / count;
    report.pred25 = 100.0 * static_cast<double>(hits) / count;
    return report;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw std::invalid_argument(fmt::format("wilcoxon: lengths differ ({} vs {})", x.size(), y.size()));
    }
    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        if (d != 0.0) {
            diffs.push_back(d);
        }
    }
    WilcoxonResult result;
    result.n = diffs.size();
    if (diffs.empty()) {
        return result;
    }
    std::vector<double> magnitudes(diffs.size());
    std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
    auto ranks = average_ranks(magnitudes);
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i] > 0.0) {
            result.statistic += ranks[i];
        }
    }

    const auto n = diffs.size();
    const double nn = static_cast<double>(n);
    if (n <= kExactLimit) {
        // Average ranks are multiples of 1/2, so doubled ranks are integers.
        std::vector<std::size_t> doubled(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
            total += doubled[i];
        }
        std::vector<double> ways(total + 1, 0.0);
        ways[0] = 1.0;
        for (auto r : doubled) {
            for (std::size_t s = total; s >= r; --s) {
                ways[s] += ways[s - r];
                if (s == r) {
                    break;
                }
            }
        }
        const double outcomes = std::ldexp(1.0, static_cast<int>(n));
        const auto observed = static_cast<std::size_t>(std::lround(2.0 * result.statistic));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t s = 0; s <= total; ++s) {
            if (s <= observed) {
                lower += ways[s];
            }
            if (s >= observed) {
                upper += ways[s];
            }
        }
        result.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / outcomes);
        result.exact = true;
        return result;
    }

    double mean = nn * (nn + 1.0) / 4.0;
    double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    std::vector<double> sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        double t = static_cast<double>(j - i);
        variance -= (t * t * t - t) / 48.0;
        i = j;
    }
    double z = (std::abs(result.statistic - mean) - 0.5) / std::sqrt(variance);
    result.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    result.exact = false;
    return result;
}

bool wilcoxon_same(std::span<const double> x, std::span<const double> y, double confidence)
{
    return wilcoxon_signed_rank(x, y).p_value > 1.0 - confidence;
}

bool better(const MetricReport& i, const MetricReport& j, Measure measure)
{
    switch (measure) {
    case Measure::Pred25:
        return i.pred25 > j.pred25;
    case Measure::Mre: {
        if (i.mre.size() != j.mre.size()) {
            throw std::invalid_argument("better: MRE vectors differ in length");
        }
        std::size_t i_smaller = 0;
        std::size_t j_smaller = 0;
        for (std::size_t p = 0; p < i.mre.size(); ++p) {
            i_smaller += i.mre[p] < j.mre[p] ? 1 : 0;
            j_smaller += j.mre[p] < i.mre[p] ? 1 : 0;
        }
        return i_smaller > j_smaller;
    }
    default:
        return i.value(measure) < j.value(measure);
    }
}

void win_tie_loss(const MetricReport& i, const MetricReport& j, Measure measure, Tally& tally_i, Tally& tally_j)
{
    if (wilcoxon_same(i.mre, j.mre, 0.95)) {
        ++tally_i.tie;
        ++tally_j.tie;
    } else if (better(i, j, measure)) {
        ++tally_i.win;
        ++tally_j.loss;
    } else {
        ++tally_j.win;
        ++tally_i.loss;
    }
}

std::vector<double> rank_summary(const std::vector<std::vector<double>>& abs_errors)
{
    const auto methods = abs_errors.size();
    std::vector<double> mean_ranks(methods, 0.0);
    if (methods == 0) {
        return mean_ranks;
    }
    const auto projects = abs_errors.front().size();
    for (const auto& errors : abs_errors) {
        if (errors.size() != projects) {
            throw std::invalid_argument("rank_summary: methods cover different projects");
        }
    }
    if (projects == 0) {
        return mean_ranks;
    }
    std::vector<double> column(methods);
    for (std::size_t p = 0; p < projects; ++p) {
        for (std::size_t m = 0; m < methods; ++m) {
            column[m] = abs_errors[m][p];
        }
        auto ranks = average_ranks(column);
        for (std::size_t m = 0; m < methods; ++m) {
            mean_ranks[m] += ranks[m];
        }
    }
    for (auto& r : mean_ranks) {
        r /= static_cast<double>(projects);
    }
    return mean_ranks;
}

} // namespace oabe
