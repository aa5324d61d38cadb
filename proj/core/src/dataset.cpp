#include "oabe/dataset.hpp"

#include "oabe/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace oabe {

namespace {

std::string trim(std::string_view s)
{
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(',', start);
        if (end == std::string_view::npos) {
            end = s.size();
        }
        auto item = trim(s.substr(start, end - start));
        if (!item.empty()) {
            out.push_back(std::move(item));
        }
        start = end + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += items[i];
    }
    return out;
}

// Splits one CSV record. Double quotes may wrap a cell; "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t row)
{
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            if (!trim(cell).empty()) {
                throw ParseError(fmt::format("row {}: unexpected quote inside a cell", row), row);
            }
            cell.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            cells.push_back(was_quoted ? cell : trim(cell));
            cell.clear();
            was_quoted = false;
        } else {
            cell += c;
        }
    }
    if (quoted) {
        throw ParseError(fmt::format("row {}: unterminated quoted cell", row), row);
    }
    cells.push_back(was_quoted ? cell : trim(cell));
    return cells;
}

bool is_missing(std::string_view cell) { return cell.empty() || cell == "?"; }

std::optional<double> parse_number(std::string_view cell)
{
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

} // namespace

// ---------------------------------------------------------------------------
// FeatureSchema

std::optional<std::size_t> FeatureSchema::index_of(std::string_view feature) const
{
    auto it = std::find(feature_names.begin(), feature_names.end(), feature);
    if (it == feature_names.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - feature_names.begin());
}

std::vector<std::size_t> FeatureSchema::size_indices() const
{
    std::vector<std::size_t> out;
    out.reserve(size_columns.size());
    for (const auto& column : size_columns) {
        if (auto j = index_of(column)) {
            out.push_back(*j);
        }
    }
    return out;
}

void FeatureSchema::validate() const
{
    if (feature_names.empty()) {
        throw ValidationError("schema declares no features");
    }
    if (feature_kinds.size() != feature_names.size()) {
        throw ValidationError("schema feature kinds do not match feature names");
    }
    if (effort_column.empty()) {
        throw ValidationError("schema has no effort column");
    }
    std::set<std::string_view> seen;
    for (const auto& name : feature_names) {
        if (!seen.insert(name).second) {
            throw ValidationError(fmt::format("duplicate feature name '{}'", name));
        }
    }
    if (seen.contains(effort_column)) {
        throw ValidationError(fmt::format("effort column '{}' is also listed as a feature", effort_column));
    }
    for (const auto& column : size_columns) {
        auto j = index_of(column);
        if (!j) {
            throw ValidationError(fmt::format("size column '{}' is not a feature", column));
        }
        if (is_categorical(*j)) {
            throw ValidationError(fmt::format("size column '{}' is categorical", column));
        }
    }
}

FeatureSchema parse_schema(std::istream& in)
{
    FeatureSchema schema;
    std::vector<std::string> categorical;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        auto text = trim(line);
        if (text.empty() || text.front() == '#' || text.front() == ';') {
            continue;
        }
        auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ParseError(fmt::format("schema line {}: expected 'key = value'", row), row);
        }
        auto key = trim(std::string_view(text).substr(0, eq));
        auto value = trim(std::string_view(text).substr(eq + 1));
        if (key == "name") {
            schema.name = value;
        } else if (key == "features") {
            schema.feature_names = split_list(value);
        } else if (key == "categorical_columns") {
            categorical = split_list(value);
        } else if (key == "effort_column") {
            schema.effort_column = value;
        } else if (key == "size_columns") {
            schema.size_columns = split_list(value);
        } else if (key == "effort_unit") {
            schema.effort_unit = value;
        } else {
            throw ParseError(fmt::format("schema line {}: unknown key '{}'", row, key), row);
        }
    }
    for (const auto& column : categorical) {
        if (std::find(schema.feature_names.begin(), schema.feature_names.end(), column) ==
            schema.feature_names.end()) {
            throw ValidationError(fmt::format("categorical column '{}' is not a feature", column));
        }
    }
    schema.feature_kinds.clear();
    for (const auto& name : schema.feature_names) {
        bool cat = std::find(categorical.begin(), categorical.end(), name) != categorical.end();
        schema.feature_kinds.push_back(cat ? FeatureKind::Categorical : FeatureKind::Continuous);
    }
    schema.validate();
    return schema;
}

FeatureSchema load_schema(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open schema file '{}'", path.string()));
    }
    auto schema = parse_schema(in);
    if (schema.name.empty()) {
        schema.name = path.stem().string();
    }
    return schema;
}

void write_schema(std::ostream& out, const FeatureSchema& schema)
{
    std::vector<std::string> categorical;
    for (std::size_t j = 0; j < schema.feature_count(); ++j) {
        if (schema.is_categorical(j)) {
            categorical.push_back(schema.feature_names[j]);
        }
    }
    out << "name = " << schema.name << '\n'
        << "features = " << join(schema.feature_names) << '\n'
        << "categorical_columns = " << join(categorical) << '\n'
        << "effort_column = " << schema.effort_column << '\n'
        << "size_columns = " << join(schema.size_columns) << '\n'
        << "effort_unit = " << schema.effort_unit << '\n';
}

// ---------------------------------------------------------------------------
// FeatureScaler

FeatureScaler FeatureScaler::fit(const FeatureSchema& schema, std::span<const Project> projects)
{
    std::vector<std::optional<FeatureRange>> ranges(schema.feature_count());
    for (std::size_t j = 0; j < schema.feature_count(); ++j) {
        if (schema.is_categorical(j) || projects.empty()) {
            continue;
        }
        FeatureRange range{projects.front().features[j], projects.front().features[j]};
        for (const auto& p : projects) {
            range.min = std::min(range.min, p.features[j]);
            range.max = std::max(range.max, p.features[j]);
        }
        ranges[j] = range;
    }
    return FeatureScaler(std::move(ranges));
}

double FeatureScaler::apply(std::size_t feature, double value) const
{
    const auto& range = ranges_.at(feature);
    if (!range) {
        return value;
    }
    return (value - range->min) / range->span();
}

double FeatureScaler::invert(std::size_t feature, double value) const
{
    const auto& range = ranges_.at(feature);
    if (!range) {
        return value;
    }
    return range->min + value * range->span();
}

Project FeatureScaler::apply(const Project& project) const
{
    if (project.features.size() != ranges_.size()) {
        throw DimensionError(fmt::format("project {} has {} features, scaler expects {}", project.id,
                                         project.features.size(), ranges_.size()));
    }
    Project out = project;
    for (std::size_t j = 0; j < out.features.size(); ++j) {
        out.features[j] = apply(j, out.features[j]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(FeatureSchema schema, std::vector<Project> projects,
                 std::vector<std::vector<std::string>> symbols, std::size_t dropped_count)
    : schema_(std::move(schema)), projects_(std::move(projects)), symbols_(std::move(symbols)),
      dropped_count_(dropped_count)
{
    schema_.validate();
    const auto m = schema_.feature_count();
    symbols_.resize(m);
    if (projects_.size() < 3) {
        throw InsufficientDataError(fmt::format("dataset '{}' has {} usable projects; at least 3 are required",
                                                schema_.name, projects_.size()));
    }
    for (std::size_t i = 0; i < projects_.size(); ++i) {
        auto& p = projects_[i];
        p.id = i;
        if (p.features.size() != m) {
            throw ValidationError(fmt::format("project {} has {} features, schema declares {}", i,
                                              p.features.size(), m));
        }
        if (!(p.effort > 0.0) || !std::isfinite(p.effort)) {
            throw ValidationError(fmt::format("project {} has non-positive effort {}", i, p.effort));
        }
        for (double v : p.features) {
            if (!std::isfinite(v)) {
                throw ValidationError(fmt::format("project {} has a non-finite feature value", i));
            }
        }
    }
    scaling_ = FeatureScaler::fit(schema_, projects_);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& range = scaling_.ranges()[j];
        if (range && !(range->min < range->max)) {
            throw ValidationError(fmt::format("continuous feature '{}' is constant", schema_.feature_names[j]));
        }
    }
}

std::span<const std::string> Dataset::symbols(std::size_t feature) const { return symbols_.at(feature); }

std::string Dataset::format_value(std::size_t feature, double value) const
{
    if (schema_.is_categorical(feature)) {
        auto code = static_cast<std::size_t>(value);
        const auto& table = symbols_.at(feature);
        return code < table.size() ? table[code] : fmt::format("#{}", code);
    }
    return fmt::format("{:g}", value);
}

std::optional<double> Dataset::symbol_code(std::size_t feature, std::string_view symbol) const
{
    const auto& table = symbols_.at(feature);
    auto it = std::find(table.begin(), table.end(), symbol);
    if (it == table.end()) {
        return std::nullopt;
    }
    return static_cast<double>(it - table.begin());
}

std::vector<double> Dataset::numeric_column(std::string_view column) const
{
    std::vector<double> values;
    values.reserve(projects_.size());
    if (column == schema_.effort_column) {
        for (const auto& p : projects_) {
            values.push_back(p.effort);
        }
        return values;
    }
    auto j = schema_.index_of(column);
    if (!j) {
        throw UnsupportedColumnError(fmt::format("unknown column '{}'", column));
    }
    if (schema_.is_categorical(*j)) {
        throw UnsupportedColumnError(fmt::format("column '{}' is categorical", column));
    }
    for (const auto& p : projects_) {
        double v = p.features[*j];
        values.push_back(source_scaling_ ? source_scaling_->invert(*j, v) : v);
    }
    return values;
}

Dataset load_dataset(std::istream& csv, const FeatureSchema& schema)
{
    schema.validate();
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(csv, line)) {
        ++row;
        if (!trim(line).empty()) {
            header = split_csv_line(line, row);
            break;
        }
    }
    if (header.empty()) {
        throw ParseError("CSV source has no header row", row);
    }
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) {
        header[0].erase(0, 3);
    }

    auto column_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ParseError(fmt::format("header has no column '{}'", name), 1);
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto m = schema.feature_count();
    std::vector<std::size_t> feature_columns(m);
    for (std::size_t j = 0; j < m; ++j) {
        feature_columns[j] = column_of(schema.feature_names[j]);
    }
    const auto effort_col = column_of(schema.effort_column);

    std::vector<std::vector<std::string>> symbols(m);
    std::vector<Project> projects;
    std::size_t dropped = 0;
    while (std::getline(csv, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        auto cells = split_csv_line(line, row);
        if (cells.size() != header.size()) {
            throw ParseError(fmt::format("row {}: expected {} cells, found {}", row, header.size(), cells.size()),
                             row);
        }
        bool missing = is_missing(cells[effort_col]);
        for (auto c : feature_columns) {
            missing = missing || is_missing(cells[c]);
        }
        if (missing) {
            ++dropped;
            continue;
        }
        Project p;
        p.features.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& cell = cells[feature_columns[j]];
            if (schema.is_categorical(j)) {
                auto& table = symbols[j];
                auto it = std::find(table.begin(), table.end(), cell);
                if (it == table.end()) {
                    table.push_back(cell);
                    it = table.end() - 1;
                }
                p.features[j] = static_cast<double>(it - table.begin());
            } else {
                auto v = parse_number(cell);
                if (!v) {
                    throw ParseError(fmt::format("row {}: '{}' is not a number (column '{}')", row, cell,
                                                 schema.feature_names[j]),
                                     row);
                }
                p.features[j] = *v;
            }
        }
        auto effort = parse_number(cells[effort_col]);
        if (!effort) {
            throw ParseError(fmt::format("row {}: effort '{}' is not a number", row, cells[effort_col]), row);
        }
        if (*effort <= 0.0) {
            throw ValidationError(fmt::format("row {}: effort must be positive, found {}", row, *effort));
        }
        p.effort = *effort;
        projects.push_back(std::move(p));
    }
    return Dataset(schema, std::move(projects), std::move(symbols), dropped);
}

Dataset load_dataset(const std::filesystem::path& csv, const FeatureSchema& schema)
{
    std::ifstream in(csv);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open dataset file '{}'", csv.string()));
    }
    return load_dataset(in, schema);
}

Dataset scale(const Dataset& dataset)
{
    if (dataset.is_scaled()) {
        return dataset;
    }
    Dataset out = dataset;
    for (auto& p : out.projects_) {
        p = dataset.scaling_.apply(p);
    }
    out.source_scaling_ = dataset.scaling_;
    out.scaling_ = FeatureScaler::fit(out.schema_, out.projects_);
    return out;
}

// ---------------------------------------------------------------------------
// Descriptive statistics

DescriptiveStats describe(std::span<const double> values)
{
    DescriptiveStats stats;
    stats.count = values.size();
    if (values.empty()) {
        return stats;
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    stats.min = sorted.front();
    stats.max = sorted.back();
    stats.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    stats.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);

    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : sorted) {
        double d = v - stats.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (n >= 3 && m2 > 0.0) {
        double g1 = m3 / std::pow(m2, 1.5);
        double nn = static_cast<double>(n);
        stats.skewness = g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
    }
    return stats;
}

DescriptiveStats describe(const Dataset& dataset, std::string_view column)
{
    auto values = dataset.numeric_column(column);
    return describe(values);
}

// ---------------------------------------------------------------------------
// Training sets and folds

TrainingSet::TrainingSet(FeatureSchema schema, std::vector<Project> raw)
    : schema_(std::move(schema)), raw_(std::move(raw))
{
    scaler_ = FeatureScaler::fit(schema_, raw_);
    scaled_.reserve(raw_.size());
    for (const auto& p : raw_) {
        scaled_.push_back(scaler_.apply(p));
    }
}

namespace {

Project raw_project(const Dataset& dataset, std::size_t i)
{
    Project p = dataset.project(i);
    if (const auto& source = dataset.source_scaling()) {
        for (std::size_t j = 0; j < p.features.size(); ++j) {
            p.features[j] = source->invert(j, p.features[j]);
        }
    }
    return p;
}

} // namespace

Split make_split(const Dataset& dataset, std::size_t test_index)
{
    if (test_index >= dataset.size()) {
        throw ParameterError(fmt::format("fold {} out of range for {} projects", test_index, dataset.size()));
    }
    std::vector<Project> train;
    train.reserve(dataset.size() - 1);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (i != test_index) {
            train.push_back(raw_project(dataset, i));
        }
    }
    TrainingSet set(dataset.schema(), std::move(train));
    auto target = set.target(raw_project(dataset, test_index));
    return Split{std::move(set), std::move(target)};
}

std::vector<Split> loocv_splits(const Dataset& dataset)
{
    std::vector<Split> splits;
    splits.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        splits.push_back(make_split(dataset, i));
    }
    return splits;
}

} // namespace oabe
