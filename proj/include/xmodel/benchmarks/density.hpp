#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "xmodel/errors.hpp"

namespace xmodel::bench {

inline double normal_cdf(double x, double mean, double sd) {
    if (sd <= 0.0) return x < mean ? 0.0 : 1.0;
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

/**
 * @brief Gaussian or finite Gaussian-mixture predictive density.
 *
 * Weights sum to one; a plain Gaussian is the single-component case.
 */
struct MixtureDensity {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> sds;

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * means[i];
        return m;
    }

    double cdf(double x) const {
        double p = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            p += weights[i] * normal_cdf(x, means[i], sds[i]);
        }
        return p;
    }

    /// Quantile by bisection; exact for the single-component case.
    double quantile(double level) const {
        if (weights.empty()) throw NumericalError("quantile of an empty density");
        double lo = means[0], hi = means[0], span = 1.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            lo = std::min(lo, means[i] - 10.0 * sds[i] - 1.0);
            hi = std::max(hi, means[i] + 10.0 * sds[i] + 1.0);
            span = std::max(span, sds[i]);
        }
        while (cdf(lo) > level) lo -= span;
        while (cdf(hi) < level) hi += span;
        for (int it = 0; it < 200 && hi - lo > 1e-10 * (1.0 + std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < level ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

/// Point and density forecast of one model for the 24 hours of a target day.
struct BenchmarkForecast {
    std::string model;
    std::array<double, 24> point{};
    std::array<MixtureDensity, 24> density;
};

}  // namespace xmodel::bench
