#include "synth.hpp"

#include "oabe/errors.hpp"
#include "oabe/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

namespace oabe::tools {

namespace {

double round_to(double value, int digits)
{
    double scale = std::pow(10.0, digits);
    return std::round(value * scale) / scale;
}

double truncated_normal(Rng& rng)
{
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    double z = normal(rng);
    return std::clamp(z, -3.0, 3.0);
}

FeatureSchema make_schema(const std::string& name, std::size_t m)
{
    FeatureSchema schema;
    schema.name = name;
    for (std::size_t j = 0; j < m; ++j) {
        schema.feature_names.push_back(fmt::format("f{}", j + 1));
        schema.feature_kinds.push_back(FeatureKind::Continuous);
    }
    schema.effort_column = "effort";
    schema.size_columns = {"f1"};
    schema.effort_unit = "hours";
    return schema;
}

void write_row(std::ostringstream& csv, std::size_t id, const std::vector<double>& features, double effort)
{
    csv << id;
    for (double f : features) {
        csv << fmt::format(",{:.4f}", f);
    }
    csv << fmt::format(",{:.6f}\n", effort);
}

} // namespace

std::optional<SynthKind> parse_synth_kind(std::string_view name)
{
    if (name == "linear") {
        return SynthKind::Linear;
    }
    if (name == "clustered") {
        return SynthKind::Clustered;
    }
    return std::nullopt;
}

std::string_view synth_kind_name(SynthKind kind) { return kind == SynthKind::Linear ? "linear" : "clustered"; }

SynthData synthesize(const SynthOptions& options)
{
    if (options.n < 5) {
        throw ParameterError(fmt::format("synth: n = {} is below the minimum of 5", options.n));
    }
    if (options.m < 1) {
        throw ParameterError("synth: m must be at least 1");
    }
    if (!(options.noise >= 0.0 && options.noise < 1.0 / 3.0)) {
        throw ParameterError(fmt::format("synth: noise {} outside [0, 1/3)", options.noise));
    }
    const std::string name = options.name.empty() ? std::string(synth_kind_name(options.kind)) : options.name;

    Rng rng(options.seed);
    SynthData data;
    data.schema = make_schema(name, options.m);

    std::ostringstream csv;
    csv << "id";
    for (const auto& f : data.schema.feature_names) {
        csv << ',' << f;
    }
    csv << ",effort\n";

    std::vector<double> features(options.m);
    if (options.kind == SynthKind::Linear) {
        boost::random::uniform_real_distribution<double> coefficient(1.0, 5.0);
        boost::random::uniform_real_distribution<double> feature(10.0, 100.0);
        std::vector<double> c(options.m);
        for (std::size_t j = 0; j < options.m; ++j) {
            c[j] = round_to(coefficient(rng), 4);
            data.coefficients.emplace_back(data.schema.feature_names[j], c[j]);
        }
        for (std::size_t i = 0; i < options.n; ++i) {
            double effort = 0.0;
            for (std::size_t j = 0; j < options.m; ++j) {
                features[j] = round_to(feature(rng), 4);
                effort += c[j] * features[j];
            }
            if (options.noise > 0.0) {
                effort *= 1.0 + options.noise * truncated_normal(rng);
            }
            write_row(csv, i, features, effort);
        }
    } else {
        constexpr double kSmallScale = 10.0;
        constexpr double kLargeScale = 60.0;
        data.coefficients = {{"small_scale", kSmallScale}, {"large_scale", kLargeScale}};
        boost::random::uniform_real_distribution<double> jitter(-10.0, 10.0);
        boost::random::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t large_count = std::max<std::size_t>(1, options.n / 4);
        for (std::size_t i = 0; i < options.n; ++i) {
            // every fourth row belongs to the large cluster
            bool large = i % 4 == 3 && i / 4 < large_count;
            double centre = large ? 80.0 : 30.0;
            double mean_size = 0.0;
            for (std::size_t j = 0; j < options.m; ++j) {
                features[j] = round_to(centre + jitter(rng), 4);
                mean_size += features[j];
            }
            mean_size /= static_cast<double>(options.m);
            double scale = large ? kLargeScale : kSmallScale;
            double spread = std::max(options.noise, 0.05);
            double effort = scale * mean_size * std::exp(spread * std::clamp(normal(rng), -3.0, 3.0));
            write_row(csv, i, features, effort);
        }
    }
    data.csv = csv.str();
    return data;
}

std::pair<std::filesystem::path, std::filesystem::path> write_synth(const SynthData& data,
                                                                    const std::filesystem::path& directory)
{
    std::filesystem::create_directories(directory);
    auto csv_path = directory / (data.schema.name + ".csv");
    auto schema_path = directory / (data.schema.name + ".schema");
    auto coefficient_path = directory / (data.schema.name + ".coefficients");
    {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        out << data.csv;
    }
    {
        std::ofstream out(schema_path, std::ios::binary | std::ios::trunc);
        write_schema(out, data.schema);
    }
    {
        std::ofstream out(coefficient_path, std::ios::binary | std::ios::trunc);
        for (const auto& [key, value] : data.coefficients) {
            out << fmt::format("{} = {}\n", key, value);
        }
    }
    if (!std::filesystem::exists(csv_path) || !std::filesystem::exists(schema_path)) {
        throw std::runtime_error(fmt::format("cannot write synthetic data into '{}'", directory.string()));
    }
    return {csv_path, schema_path};
}

} // namespace oabe::tools
