#pragma once

#include "oabe/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oabe::tools {

enum class SynthKind { Linear, Clustered };

std::optional<SynthKind> parse_synth_kind(std::string_view name);
std::string_view synth_kind_name(SynthKind kind);

struct SynthOptions {
    SynthKind kind = SynthKind::Linear;
    std::size_t n = 60;
    std::size_t m = 3;
    double noise = 0.1; // relative standard deviation of multiplicative effort noise
    std::uint64_t seed = 1;
    std::string name;   // defaults to the kind name
};

/// Generated data, ready to be written or parsed.
///
/// linear: features uniform on [10, 100], effort = sum_j c_j f_j with
/// c_j uniform on [1, 5], times (1 + noise * z) for a standard normal z
/// truncated to [-3, 3].
/// clustered: a small-project cluster (3/4 of the rows) and a large-project
/// cluster with six times the effort scale; within each cluster effort grows
/// with mean feature size and carries lognormal noise, so the effort column
/// is right-skewed.
struct SynthData {
    FeatureSchema schema;
    std::string csv;
    /// Generating constants: c_j for linear, the two cluster effort scales for clustered.
    std::vector<std::pair<std::string, double>> coefficients;
};

SynthData synthesize(const SynthOptions& options);

/// Writes <name>.csv, <name>.schema and <name>.coefficients; returns the CSV and schema paths.
std::pair<std::filesystem::path, std::filesystem::path> write_synth(const SynthData& data,
                                                                    const std::filesystem::path& directory);

} // namespace oabe::tools
