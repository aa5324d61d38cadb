#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oabe {

enum class FeatureKind { Continuous, Categorical };

/// Column layout of an effort dataset.
///
/// The effort column is kept apart from the features. Size columns are the
/// continuous features that the size-extrapolation baselines read in raw units.
struct FeatureSchema {
    std::string name;
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;
    std::string effort_column;
    std::vector<std::string> size_columns;
    std::string effort_unit;

    std::size_t feature_count() const noexcept { return feature_names.size(); }
    bool is_categorical(std::size_t j) const { return feature_kinds[j] == FeatureKind::Categorical; }
    std::optional<std::size_t> index_of(std::string_view feature) const;
    /// Feature indices of `size_columns`, in declaration order.
    std::vector<std::size_t> size_indices() const;

    /// Throws ValidationError when an invariant does not hold.
    void validate() const;
};

/// Reads a `key = value` schema file. Recognised keys: name, features,
/// categorical_columns, effort_column, size_columns, effort_unit. List values
/// are comma separated.
FeatureSchema parse_schema(std::istream& in);
FeatureSchema load_schema(const std::filesystem::path& path);
void write_schema(std::ostream& out, const FeatureSchema& schema);

/// One project. Categorical feature values are stored as symbol codes owned
/// by the enclosing Dataset; codes compare by identity.
struct Project {
    std::size_t id = 0;
    std::vector<double> features;
    double effort = 0.0;
};

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;

    /// max - min, or 1 for a degenerate range so that scaling stays finite.
    double span() const noexcept { return max > min ? max - min : 1.0; }
};

/// Min-max scaler for continuous features. Categorical entries are nullopt.
class FeatureScaler {
public:
    FeatureScaler() = default;
    explicit FeatureScaler(std::vector<std::optional<FeatureRange>> ranges) : ranges_(std::move(ranges)) {}

    /// Fits on the given projects. Degenerate ranges are tolerated here
    /// (span() falls back to 1); Dataset rejects them on construction.
    static FeatureScaler fit(const FeatureSchema& schema, std::span<const Project> projects);

    double apply(std::size_t feature, double value) const;
    double invert(std::size_t feature, double value) const;
    /// Values outside the fitted range are not clamped.
    Project apply(const Project& project) const;

    const std::vector<std::optional<FeatureRange>>& ranges() const noexcept { return ranges_; }

private:
    std::vector<std::optional<FeatureRange>> ranges_;
};

class Dataset {
public:
    /// Validates every Dataset invariant; throws ValidationError or
    /// InsufficientDataError. Project ids are reassigned to 0..N-1.
    Dataset(FeatureSchema schema, std::vector<Project> projects,
            std::vector<std::vector<std::string>> symbols = {}, std::size_t dropped_count = 0);

    const FeatureSchema& schema() const noexcept { return schema_; }
    const std::string& name() const noexcept { return schema_.name; }
    std::span<const Project> projects() const noexcept { return projects_; }
    const Project& project(std::size_t i) const { return projects_.at(i); }
    std::size_t size() const noexcept { return projects_.size(); }
    std::size_t feature_count() const noexcept { return schema_.feature_count(); }
    std::size_t dropped_count() const noexcept { return dropped_count_; }

    /// Ranges of the continuous features as they are stored in this dataset.
    const FeatureScaler& scaling() const noexcept { return scaling_; }
    bool is_scaled() const noexcept { return source_scaling_.has_value(); }
    /// For a scaled dataset, the ranges that mapped the raw values to [0,1].
    const std::optional<FeatureScaler>& source_scaling() const noexcept { return source_scaling_; }

    /// Symbol table of a categorical feature (empty for continuous features).
    std::span<const std::string> symbols(std::size_t feature) const;
    std::string format_value(std::size_t feature, double value) const;
    /// Code of `symbol` in a categorical feature, or nullopt if never seen.
    std::optional<double> symbol_code(std::size_t feature, std::string_view symbol) const;

    /// Unscaled values of a continuous feature or of the effort column.
    /// Throws UnsupportedColumnError for categorical or unknown columns.
    std::vector<double> numeric_column(std::string_view column) const;

private:
    friend Dataset scale(const Dataset& dataset);

    FeatureSchema schema_;
    std::vector<Project> projects_;
    std::vector<std::vector<std::string>> symbols_;
    std::size_t dropped_count_ = 0;
    FeatureScaler scaling_;
    std::optional<FeatureScaler> source_scaling_;
};

/// Parses a comma-separated file with a header row. Rows holding an empty
/// cell or `?` in any schema column are dropped and counted.
Dataset load_dataset(std::istream& csv, const FeatureSchema& schema);
Dataset load_dataset(const std::filesystem::path& csv, const FeatureSchema& schema);

/// Maps every continuous feature to [0,1]. Idempotent.
Dataset scale(const Dataset& dataset);

struct DescriptiveStats {
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double skewness = 0.0;
};

/// Adjusted Fisher-Pearson skewness; zero for constant or too-short samples.
DescriptiveStats describe(std::span<const double> values);
DescriptiveStats describe(const Dataset& dataset, std::string_view column);

/// The historical side of one estimation: raw projects, the scaler fitted on
/// them and their scaled copies. Ids are the ids of the source dataset.
struct Target {
    Project raw;
    Project scaled;
};

class TrainingSet {
public:
    TrainingSet(FeatureSchema schema, std::vector<Project> raw);

    const FeatureSchema& schema() const noexcept { return schema_; }
    std::span<const Project> raw() const noexcept { return raw_; }
    std::span<const Project> scaled() const noexcept { return scaled_; }
    const FeatureScaler& scaler() const noexcept { return scaler_; }
    std::size_t size() const noexcept { return raw_.size(); }

    Target target(const Project& raw) const { return {raw, scaler_.apply(raw)}; }

private:
    FeatureSchema schema_;
    std::vector<Project> raw_;
    std::vector<Project> scaled_;
    FeatureScaler scaler_;
};

struct Split {
    TrainingSet train;
    Target test;
};

/// Leave-one-out fold `test_index`: the scaler is refit on the other N-1 projects.
Split make_split(const Dataset& dataset, std::size_t test_index);
std::vector<Split> loocv_splits(const Dataset& dataset);

} // namespace oabe
