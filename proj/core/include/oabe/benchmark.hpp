#pragma once

#include "oabe/dataset.hpp"
#include "oabe/estimators.hpp"
#include "oabe/evaluation.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oabe {

struct BenchmarkConfig {
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    EstimatorOptions options{};
    /// Settings tried for every fixed-k method; the best by MMRE is kept.
    std::vector<std::size_t> k_sweep{1, 2, 3, 4, 5};
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

/// Leave-one-out outcome of one method on one dataset.
struct MethodResult {
    Method method = Method::Abe;
    std::size_t k = 0;                 // selected setting; 0 for OABE, which picks k per project
    std::vector<std::size_t> chosen_k; // per project
    std::vector<double> predicted;     // per project, raw units
    MetricReport report;
};

struct DatasetResult {
    std::string name;
    bool ok = false;
    std::string error;
    std::vector<std::size_t> project_ids;
    std::vector<double> actual;
    std::vector<MethodResult> methods; // in BenchmarkConfig::methods order
    std::vector<double> mean_ranks;    // same order
};

struct BenchmarkReport {
    std::uint64_t seed = 0;
    std::vector<Method> methods;
    std::vector<DatasetResult> datasets;
    std::map<Method, Tally> tallies;

    std::size_t succeeded() const;
};

/// Per-fold random stream seed derived from (master seed, dataset name, fold, stream tag).
std::uint64_t derive_seed(std::uint64_t master, std::string_view dataset, std::size_t fold,
                          std::string_view stream = {});

/// Runs `count` tasks on up to `jobs` threads. Tasks must write to disjoint state.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task);

/// Leave-one-out evaluation of every configured method on one dataset.
DatasetResult evaluate_dataset(const Dataset& dataset, const BenchmarkConfig& config);

/// Win-tie-loss over every method pair, measure and successful dataset.
std::map<Method, Tally> tournament(std::span<const DatasetResult> datasets, std::span<const Method> methods);

/// Evaluates every dataset; a dataset that throws is recorded as failed and
/// excluded from the tournament.
BenchmarkReport run_benchmark(std::span<const Dataset> datasets, const BenchmarkConfig& config);

/// Adds a dataset that could not be loaded, so it shows up in the report.
void record_failure(BenchmarkReport& report, std::string name, std::string error);

/// Writes metrics.csv, estimates.csv, win_tie_loss.csv, mean_ranks.csv and
/// summary.md into `directory` (created if needed). Returns the written paths.
std::vector<std::filesystem::path> write_report(const BenchmarkReport& report, const std::filesystem::path& directory);

} // namespace oabe
