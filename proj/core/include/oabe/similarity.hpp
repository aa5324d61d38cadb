#pragma once

#include "oabe/dataset.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace oabe {

struct Neighbor {
    std::size_t index = 0;      // position in the training span
    std::size_t project_id = 0; // id of the project in its dataset
    double distance = 0.0;
    std::size_t rank = 0;       // 1 = nearest
};

/// Root of the mean per-feature squared gap between two scaled projects.
/// Continuous gaps are value differences; categorical gaps are 0 when the
/// symbols match and 1 otherwise.
double distance(const Project& a, const Project& b, const FeatureSchema& schema);

/// The k nearest training projects, nearest first. Equal distances are
/// ordered by ascending project id. Throws ParameterError unless 1 <= k <= |train|.
std::vector<Neighbor> retrieve(const Project& target, std::span<const Project> train,
                               const FeatureSchema& schema, std::size_t k);

} // namespace oabe
