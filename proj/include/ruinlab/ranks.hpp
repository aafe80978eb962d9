#pragma once

#include <span>
#include <vector>

namespace ruinlab {

// 1-based ranks; tied values share the mean of the ranks they occupy.
std::vector<double> midranks(std::span<const double> values);

// Pseudo-observations rank / (n + 1), in (0, 1).
std::vector<double> pseudo_observations(std::span<const double> values);

double median(std::span<const double> values);

} // namespace ruinlab
