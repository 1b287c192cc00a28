#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "xmodel/errors.hpp"

namespace xmodel::bench {

/// AR(p) fit with intercept handled through the sample mean.
struct ArFit {
    std::vector<double> phi;  // phi_1..phi_p
    double mean = 0.0;
    double sigma2 = 0.0;  // innovation variance at the selected order
    double aic = 0.0;
    int order = 0;
};

/// Biased sample autocovariances gamma(0..max_lag) of the centered series.
inline std::vector<double> autocovariance(const std::vector<double>& series, int max_lag,
                                          double mean) {
    const std::size_t n = series.size();
    std::vector<double> gamma(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double sum = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
            sum += (series[t] - mean) * (series[t - static_cast<std::size_t>(k)] - mean);
        }
        gamma[static_cast<std::size_t>(k)] = sum / static_cast<double>(n);
    }
    return gamma;
}

/**
 * @brief Solves the Yule-Walker equations by Levinson-Durbin for every
 * order 1..max_order and keeps the AIC-optimal fit.
 *
 * AIC = n log(sigma2_p) + 2p with sigma2_p the recursion's prediction-error
 * variance. A non-positive error variance signals a numerically singular
 * autocovariance system.
 */
inline ArFit fit_ar_yule_walker(const std::vector<double>& series, int max_order) {
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(max_order)) {
        throw InsufficientHistoryError("AR fit needs more observations than the maximum order");
    }
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    const std::vector<double> gamma = autocovariance(series, max_order, mean);
    if (!(gamma[0] > 0.0)) {
        // Constant series: the degenerate AR(1) with zero coefficient is the
        // natural limit and forecasts the constant.
        ArFit fit;
        fit.phi = {0.0};
        fit.mean = mean;
        fit.sigma2 = 0.0;
        fit.order = 1;
        fit.aic = -std::numeric_limits<double>::infinity();
        return fit;
    }

    std::vector<double> phi(static_cast<std::size_t>(max_order), 0.0);
    std::vector<double> prev(static_cast<std::size_t>(max_order), 0.0);
    double v = gamma[0];

    ArFit best;
    best.mean = mean;
    bool have_best = false;
    for (int p = 1; p <= max_order; ++p) {
        double acc = gamma[static_cast<std::size_t>(p)];
        for (int k = 1; k < p; ++k) {
            acc -= prev[static_cast<std::size_t>(k - 1)] * gamma[static_cast<std::size_t>(p - k)];
        }
        if (!(v > 0.0)) {
            throw NumericalError("Yule-Walker system became singular at order " +
                                 std::to_string(p));
        }
        const double reflection = acc / v;
        for (int k = 1; k < p; ++k) {
            phi[static_cast<std::size_t>(k - 1)] =
                prev[static_cast<std::size_t>(k - 1)] -
                reflection * prev[static_cast<std::size_t>(p - 1 - k)];
        }
        phi[static_cast<std::size_t>(p - 1)] = reflection;
        v *= (1.0 - reflection * reflection);
        std::copy(phi.begin(), phi.begin() + p, prev.begin());

        const double aic =
            static_cast<double>(n) * std::log(std::max(v, 1e-300)) + 2.0 * static_cast<double>(p);
        if (!have_best || aic < best.aic) {
            best.phi.assign(phi.begin(), phi.begin() + p);
            best.sigma2 = v;
            best.aic = aic;
            best.order = p;
            have_best = true;
        }
    }
    return best;
}

/// Checks the Yule-Walker equations at the fitted coefficients; returns the
/// largest absolute defect over k = 1..p (tests use this as an oracle).
inline double yule_walker_defect(const ArFit& fit, const std::vector<double>& gamma) {
    double worst = 0.0;
    const int p = fit.order;
    for (int k = 1; k <= p; ++k) {
        double lhs = 0.0;
        for (int j = 1; j <= p; ++j) {
            lhs += fit.phi[static_cast<std::size_t>(j - 1)] *
                   gamma[static_cast<std::size_t>(std::abs(k - j))];
        }
        worst = std::max(worst, std::abs(lhs - gamma[static_cast<std::size_t>(k)]));
    }
    return worst;
}

/**
 * @brief Recursive multi-step forecasts with MA-weight variances.
 *
 * Forecast s steps past the series end substitutes earlier forecasts for
 * unobserved values; Var_s = sigma2 * sum of squared psi-weights.
 */
struct ArForecaster {
    const ArFit& fit;
    const std::vector<double>& series;

    double point(int steps) const {
        const int p = fit.order;
        std::vector<double> extended;
        extended.reserve(static_cast<std::size_t>(steps));
        for (int s = 1; s <= steps; ++s) {
            double y = 0.0;
            for (int k = 1; k <= p; ++k) {
                const int idx = s - k;  // position relative to the series end
                const double past =
                    idx >= 1 ? extended[static_cast<std::size_t>(idx - 1)]
                             : series[series.size() - static_cast<std::size_t>(1 - idx)] - fit.mean;
                y += fit.phi[static_cast<std::size_t>(k - 1)] * past;
            }
            extended.push_back(y);
        }
        return extended.back() + fit.mean;
    }

    double variance(int steps) const {
        const int p = fit.order;
        std::vector<double> psi(static_cast<std::size_t>(steps), 0.0);
        double total = 0.0;
        for (int i = 0; i < steps; ++i) {
            double w;
            if (i == 0) {
                w = 1.0;
            } else {
                w = 0.0;
                for (int k = 1; k <= std::min(i, p); ++k) {
                    w += fit.phi[static_cast<std::size_t>(k - 1)] *
                         psi[static_cast<std::size_t>(i - k)];
                }
            }
            psi[static_cast<std::size_t>(i)] = w;
            total += w * w;
        }
        return fit.sigma2 * total;
    }
};

}  // namespace xmodel::bench
