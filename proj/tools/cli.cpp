#include "cli.hpp"

#include "synth.hpp"

#include "oabe/benchmark.hpp"
#include "oabe/dataset.hpp"
#include "oabe/errors.hpp"
#include "oabe/estimators.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace oabe::tools {

namespace {

namespace fs = std::filesystem;

constexpr const char* kSeedVariable = "OABE_SEED";

/// Thrown for problems the user has to fix on the command line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BeesFlags {
    std::size_t n = 0;
    std::size_t u = 0;
    std::size_t b = 0;
    std::size_t nep = 0;
    std::size_t nsp = 0;
    double ngh = 0.0;
    std::size_t iters = 0;
    std::size_t k_max = 0;

    void add_to(CLI::App& cmd)
    {
        BeesConfig defaults;
        n = defaults.scouts;
        u = defaults.sites;
        b = defaults.elite_sites;
        nep = defaults.elite_recruits;
        nsp = defaults.site_recruits;
        ngh = defaults.patch_radius;
        iters = defaults.max_iterations;
        cmd.add_option("--ba-n", n, "Scout bees (initial solutions)")->capture_default_str();
        cmd.add_option("--ba-u", u, "Selected sites")->capture_default_str();
        cmd.add_option("--ba-b", b, "Elite sites among the selected")->capture_default_str();
        cmd.add_option("--ba-nep", nep, "Bees recruited per elite site")->capture_default_str();
        cmd.add_option("--ba-nsp", nsp, "Bees recruited per other selected site")->capture_default_str();
        cmd.add_option("--ba-ngh", ngh, "Initial patch radius")->capture_default_str();
        cmd.add_option("--ba-iters", iters, "Maximum iterations")->capture_default_str();
        cmd.add_option("--k-max", k_max, "Largest k OABE may choose (default: min(10, N-1))");
    }

    BeesConfig config(std::size_t train_size) const
    {
        BeesConfig c;
        c.scouts = n;
        c.sites = u;
        c.elite_sites = b;
        c.elite_recruits = nep;
        c.site_recruits = nsp;
        c.patch_radius = ngh;
        c.max_iterations = iters;
        c.k_max = k_max > 0 ? std::min(k_max, train_size) : default_k_max(train_size);
        try {
            c.validate();
        } catch (const ParameterError& e) {
            throw UsageError(e.what());
        }
        return c;
    }
};

struct SeedFlag {
    std::optional<std::uint64_t> value;

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--seed", value, "Master random seed (random when omitted)")->envname(kSeedVariable);
    }

    std::uint64_t resolve() const
    {
        if (value) {
            return *value;
        }
        std::random_device device;
        return (static_cast<std::uint64_t>(device()) << 32) ^ device();
    }
};

fs::path schema_path_for(const fs::path& dataset, const std::string& schema)
{
    if (!schema.empty()) {
        return schema;
    }
    auto path = dataset;
    return path.replace_extension(".schema");
}

FeatureSchema require_schema(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw UsageError(fmt::format("schema file '{}' does not exist", path.string()));
    }
    return load_schema(path);
}

Dataset require_dataset(const fs::path& csv, const FeatureSchema& schema)
{
    if (!fs::exists(csv)) {
        throw UsageError(fmt::format("dataset file '{}' does not exist", csv.string()));
    }
    return load_dataset(csv, schema);
}

std::vector<Method> parse_methods(const std::vector<std::string>& names)
{
    std::vector<Method> methods;
    for (const auto& name : names) {
        if (name.empty()) {
            continue;
        }
        auto m = parse_method(name);
        if (!m) {
            throw UsageError(fmt::format("unknown method '{}'; valid methods: {}", name, method_names()));
        }
        if (std::find(methods.begin(), methods.end(), *m) == methods.end()) {
            methods.push_back(*m);
        }
    }
    if (methods.empty()) {
        throw UsageError(fmt::format("no methods selected; valid methods: {}", method_names()));
    }
    return methods;
}

// --------------------------------------------------------------------------
// stats

void print_stats(const Dataset& dataset, std::ostream& out)
{
    const auto& schema = dataset.schema();
    out << fmt::format("dataset {}: {} features, {} projects, effort unit {}", dataset.name(), schema.feature_count(),
                       dataset.size(), schema.effort_unit.empty() ? "-" : schema.effort_unit);
    if (dataset.dropped_count() > 0) {
        out << fmt::format(" ({} rows with missing values dropped)", dataset.dropped_count());
    }
    out << '\n';
    out << fmt::format("{:<20} {:>12} {:>12} {:>12} {:>12} {:>8}\n", "column", "min", "max", "mean", "median", "skew");
    auto row = [&](const std::string& column) {
        auto s = describe(dataset, column);
        out << fmt::format("{:<20} {:>12.6g} {:>12.6g} {:>12.6g} {:>12.6g} {:>8.2f}\n", column, s.min, s.max, s.mean,
                           s.median, s.skewness);
    };
    row(schema.effort_column);
    for (std::size_t j = 0; j < schema.feature_count(); ++j) {
        if (!schema.is_categorical(j)) {
            row(schema.feature_names[j]);
        }
    }
}

// --------------------------------------------------------------------------
// estimate

Project parse_feature_values(const Dataset& dataset, const std::string& text)
{
    const auto& schema = dataset.schema();
    Project target;
    target.id = dataset.size();
    target.features.assign(schema.feature_count(), 0.0);
    std::vector<bool> seen(schema.feature_count(), false);
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw UsageError(fmt::format("feature value '{}' is not name=value", item));
        }
        auto name = item.substr(0, eq);
        auto value = item.substr(eq + 1);
        auto j = schema.index_of(name);
        if (!j) {
            throw UsageError(fmt::format("unknown feature '{}'", name));
        }
        if (schema.is_categorical(*j)) {
            auto code = dataset.symbol_code(*j, value);
            target.features[*j] = code ? *code : static_cast<double>(dataset.symbols(*j).size());
        } else {
            try {
                std::size_t used = 0;
                target.features[*j] = std::stod(value, &used);
                if (used != value.size()) {
                    throw std::invalid_argument(value);
                }
            } catch (const std::exception&) {
                throw UsageError(fmt::format("feature '{}' needs a number, got '{}'", name, value));
            }
        }
        seen[*j] = true;
    }
    for (std::size_t j = 0; j < seen.size(); ++j) {
        if (!seen[j]) {
            throw UsageError(fmt::format("missing value for feature '{}'", schema.feature_names[j]));
        }
    }
    return target;
}

void print_record(const EstimationRecord& record, const TrainingSet& train, std::optional<double> actual,
                  std::ostream& out)
{
    out << fmt::format("method: {}\n", method_name(record.method));
    out << fmt::format("target: {}\n", record.target_id);
    out << fmt::format("k: {}\n", record.k);
    out << fmt::format("{:>4} {:>8} {:>10} {:>14} {:>10} {:>10}\n", "rank", "project", "distance", "effort", "delta",
                       "adjusted");
    for (std::size_t i = 0; i < record.neighbors.size(); ++i) {
        const auto& n = record.neighbors[i];
        out << fmt::format("{:>4} {:>8} {:>10.6f} {:>14.6g} {:>10.6f} {:>10.6f}\n", n.rank, n.project_id, n.distance,
                           train.raw()[n.index].effort, record.deltas[i], record.adjusted[i]);
    }
    if (!record.weights.empty()) {
        const auto m = train.schema().feature_count();
        out << (record.method == Method::Ga ? "coefficients:\n" : "weights:\n");
        for (std::size_t r = 0; r * m < record.weights.size(); ++r) {
            out << ' ';
            for (std::size_t j = 0; j < m; ++j) {
                out << fmt::format(" {:.6f}", record.weights[r * m + j]);
            }
            out << '\n';
        }
    }
    if (!record.optimizer_trace.empty()) {
        out << fmt::format("search: {} iterations, best fitness {:.3e}\n", record.optimizer_trace.size(),
                           record.optimizer_trace.back());
    }
    if (record.fallback) {
        out << "note: no analogy had a usable size; fell back to plain analogy\n";
    }
    out << fmt::format("estimate: {:.6f}\n", record.estimate);
    if (actual) {
        out << fmt::format("actual: {:.6f}\n", *actual);
        out << fmt::format("MRE: {:.4f}\n", std::abs(*actual - record.estimate) / *actual);
    }
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Analogy-based software effort estimation with Bees Algorithm adjustment", "oabe"};
    app.set_config("--config", "", "Configuration file (TOML/INI); command-line flags take precedence");
    app.require_subcommand(1);

    // stats
    std::string dataset_path;
    std::string schema_path;
    auto* stats = app.add_subcommand("stats", "Descriptive statistics of a dataset");
    stats->add_option("--dataset", dataset_path, "Dataset CSV")->required();
    stats->add_option("--schema", schema_path, "Schema file (default: dataset path with .schema)");

    // estimate
    auto* estimate_cmd = app.add_subcommand("estimate", "Estimate the effort of one project");
    std::string method_text = "oabe";
    std::size_t k = 3;
    std::optional<std::size_t> row;
    std::string feature_text;
    double rtm_c = 0.5;
    BeesFlags estimate_bees;
    SeedFlag estimate_seed;
    estimate_cmd->add_option("--dataset", dataset_path, "Dataset CSV")->required();
    estimate_cmd->add_option("--schema", schema_path, "Schema file (default: dataset path with .schema)");
    estimate_cmd->add_option("--method", method_text, fmt::format("One of: {}", method_names()))
        ->capture_default_str();
    estimate_cmd->add_option("--k", k, "Analogies for fixed-k methods")->capture_default_str();
    auto* row_opt = estimate_cmd->add_option("--row", row, "Estimate an existing project (left out of the case base)");
    estimate_cmd->add_option("--features", feature_text, "Feature values of a new project: name=value,...")
        ->excludes(row_opt);
    estimate_cmd->add_option("--rtm-c", rtm_c, "Regression-toward-the-mean coefficient")->capture_default_str();
    estimate_bees.add_to(*estimate_cmd);
    estimate_seed.add_to(*estimate_cmd);

    // benchmark
    auto* benchmark_cmd = app.add_subcommand("benchmark", "Leave-one-out comparison of all methods");
    std::vector<std::string> dataset_paths;
    std::vector<std::string> schema_paths;
    std::vector<std::string> method_list(kAllMethods.size());
    std::transform(kAllMethods.begin(), kAllMethods.end(), method_list.begin(),
                   [](Method m) { return std::string(method_name(m)); });
    std::string out_dir = "oabe-report";
    std::size_t jobs = 1;
    BeesFlags benchmark_bees;
    SeedFlag benchmark_seed;
    benchmark_cmd->add_option("--dataset", dataset_paths, "Dataset CSV (repeatable)")->required();
    benchmark_cmd->add_option("--schema", schema_paths, "Schema file per dataset (default: <dataset>.schema)");
    benchmark_cmd->add_option("--method", method_list, "Methods to compare")->delimiter(',')->capture_default_str();
    benchmark_cmd->add_option("--out", out_dir, "Report directory")->capture_default_str();
    benchmark_cmd->add_option("--jobs", jobs, "Parallel folds")->capture_default_str();
    benchmark_cmd->add_option("--rtm-c", rtm_c, "Regression-toward-the-mean coefficient")->capture_default_str();
    benchmark_bees.add_to(*benchmark_cmd);
    benchmark_seed.add_to(*benchmark_cmd);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with its schema");
    std::string kind_text = "linear";
    SynthOptions synth;
    std::string synth_out = ".";
    synth_cmd->add_option("--kind", kind_text, "linear or clustered")->capture_default_str();
    synth_cmd->add_option("--n", synth.n, "Projects")->capture_default_str();
    synth_cmd->add_option("--m", synth.m, "Features")->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise, "Relative effort noise")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--name", synth.name, "File stem and dataset name (default: the kind)");
    synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (stats->parsed()) {
            auto schema = require_schema(schema_path_for(dataset_path, schema_path));
            print_stats(require_dataset(dataset_path, schema), out);
            return kSuccess;
        }

        if (estimate_cmd->parsed()) {
            auto method = parse_method(method_text);
            if (!method) {
                throw UsageError(fmt::format("unknown method '{}'; valid methods: {}", method_text, method_names()));
            }
            auto schema = require_schema(schema_path_for(dataset_path, schema_path));
            auto dataset = require_dataset(dataset_path, schema);
            std::optional<double> actual;
            std::optional<Split> split;
            if (row) {
                if (*row >= dataset.size()) {
                    throw UsageError(fmt::format("row {} out of range (dataset has {} projects)", *row, dataset.size()));
                }
                split.emplace(make_split(dataset, *row));
                actual = dataset.project(*row).effort;
            } else if (!feature_text.empty()) {
                TrainingSet train(dataset.schema(), {dataset.projects().begin(), dataset.projects().end()});
                auto target = train.target(parse_feature_values(dataset, feature_text));
                split.emplace(Split{std::move(train), std::move(target)});
            } else {
                throw UsageError("estimate needs --row or --features");
            }
            if (*method != Method::Oabe && (k < 1 || k > split->train.size())) {
                throw UsageError(fmt::format("--k {} outside [1, {}]", k, split->train.size()));
            }
            EstimatorOptions options;
            options.bees = estimate_bees.config(split->train.size());
            options.rtm_c = rtm_c;
            auto seed = estimate_seed.resolve();
            out << fmt::format("seed: {}\n", seed);
            auto record = oabe::estimate(*method, split->test, split->train, k, options, seed);
            print_record(record, split->train, actual, out);
            return kSuccess;
        }

        if (benchmark_cmd->parsed()) {
            BenchmarkConfig config;
            config.methods = parse_methods(method_list);
            if (!schema_paths.empty() && schema_paths.size() != dataset_paths.size()) {
                throw UsageError(fmt::format("{} --schema values for {} --dataset values", schema_paths.size(),
                                             dataset_paths.size()));
            }
            config.seed = benchmark_seed.resolve();
            config.jobs = std::max<std::size_t>(jobs, 1);
            config.options.rtm_c = rtm_c;

            std::vector<Dataset> datasets;
            std::vector<std::pair<std::string, std::string>> failures;
            std::size_t largest = 0;
            for (std::size_t i = 0; i < dataset_paths.size(); ++i) {
                fs::path csv = dataset_paths[i];
                try {
                    auto schema = load_schema(schema_path_for(csv, schema_paths.empty() ? "" : schema_paths[i]));
                    datasets.push_back(load_dataset(csv, schema));
                    largest = std::max(largest, datasets.back().size());
                } catch (const std::exception& e) {
                    failures.emplace_back(csv.stem().string(), e.what());
                    err << fmt::format("warning: {}: {}\n", csv.string(), e.what());
                }
            }
            // k_max is capped per fold inside the benchmark
            config.options.bees = benchmark_bees.config(std::max<std::size_t>(largest, 2));
            if (benchmark_bees.k_max == 0) {
                config.options.bees.k_max = 10;
            }

            auto report = run_benchmark(datasets, config);
            for (auto& [name, error] : failures) {
                record_failure(report, name, error);
            }
            auto files = write_report(report, out_dir);

            out << fmt::format("seed: {}\n", report.seed);
            for (const auto& d : report.datasets) {
                if (!d.ok) {
                    err << fmt::format("dataset {} failed: {}\n", d.name, d.error);
                }
            }
            out << fmt::format("{:<8} {:>6} {:>6} {:>6}\n", "method", "win", "tie", "loss");
            for (auto m : report.methods) {
                const auto& t = report.tallies.at(m);
                out << fmt::format("{:<8} {:>6} {:>6} {:>6}\n", method_name(m), t.win, t.tie, t.loss);
            }
            for (const auto& f : files) {
                out << "wrote " << f.string() << '\n';
            }
            return report.succeeded() > 0 ? kSuccess : kRuntimeFailure;
        }

        if (synth_cmd->parsed()) {
            auto kind = parse_synth_kind(kind_text);
            if (!kind) {
                throw UsageError(fmt::format("unknown synthetic kind '{}'; use linear or clustered", kind_text));
            }
            synth.kind = *kind;
            if (synth.n < 5) {
                throw UsageError(fmt::format("--n {} is below the minimum of 5", synth.n));
            }
            SynthData data;
            try {
                data = synthesize(synth);
            } catch (const ParameterError& e) {
                throw UsageError(e.what());
            }
            auto [csv, schema] = write_synth(data, synth_out);
            out << "wrote " << csv.string() << '\n' << "wrote " << schema.string() << '\n';
            return kSuccess;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}

} // namespace oabe::tools
