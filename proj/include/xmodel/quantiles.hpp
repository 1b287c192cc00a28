#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xmodel/errors.hpp"

namespace xmodel {

/**
 * @brief Empirical quantile with linear interpolation between order
 * statistics: at level q the value is x_(i) + f*(x_(i+1) - x_(i)) where
 * i = floor((n-1)q) + 1 and f the fractional part (one-based ranks).
 *
 * The input must be sorted ascending.
 */
inline double quantile_sorted(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) throw ConfigError("quantile of an empty sample");
    if (level <= 0.0) return sorted.front();
    if (level >= 1.0) return sorted.back();
    const double pos = (static_cast<double>(sorted.size()) - 1.0) * level;
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double level) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, level);
}

/// The forecast report levels: 0.1%, 1%, 2%, ..., 99%, 99.9%.
inline std::vector<double> report_quantile_levels() {
    std::vector<double> levels;
    levels.push_back(0.001);
    for (int i = 1; i <= 99; ++i) levels.push_back(i / 100.0);
    levels.push_back(0.999);
    return levels;
}

}  // namespace xmodel
