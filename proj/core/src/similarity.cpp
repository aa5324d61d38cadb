#include "oabe/similarity.hpp"

#include "oabe/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace oabe {

double distance(const Project& a, const Project& b, const FeatureSchema& schema)
{
    const auto m = schema.feature_count();
    if (a.features.size() != m || b.features.size() != m) {
        throw DimensionError(fmt::format("distance: projects have {} and {} features, schema declares {}",
                                         a.features.size(), b.features.size(), m));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double gap = schema.is_categorical(j) ? (a.features[j] == b.features[j] ? 0.0 : 1.0)
                                              : a.features[j] - b.features[j];
        sum += gap * gap;
    }
    return std::sqrt(sum / static_cast<double>(m));
}

std::vector<Neighbor> retrieve(const Project& target, std::span<const Project> train,
                               const FeatureSchema& schema, std::size_t k)
{
    if (k < 1 || k > train.size()) {
        throw ParameterError(fmt::format("k = {} outside [1, {}]", k, train.size()));
    }
    std::vector<Neighbor> all;
    all.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        all.push_back({i, train[i].id, distance(target, train[i], schema), 0});
    }
    auto closer = [](const Neighbor& x, const Neighbor& y) {
        if (x.distance != y.distance) {
            return x.distance < y.distance;
        }
        return x.project_id < y.project_id;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
    all.resize(k);
    for (std::size_t r = 0; r < k; ++r) {
        all[r].rank = r + 1;
    }
    return all;
}

} // namespace oabe
