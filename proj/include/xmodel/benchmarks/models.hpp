#pragma once

#include <memory>
#include <string>
#include <vector>

#include "xmodel/benchmarks/density.hpp"
#include "xmodel/benchmarks/regime.hpp"
#include "xmodel/benchmarks/yule_walker.hpp"
#include "xmodel/errors.hpp"
#include "xmodel/panel.hpp"

namespace xmodel::bench {

/**
 * @brief A benchmark produces point and density forecasts for the 24 hours
 * of a target day from the trailing window [w_begin, target).
 *
 * Implementations only read pre-auction information: auction outcomes of
 * delivery days before the target, and planned series through the target
 * day. The univariate AR additionally cuts the hourly stream at the 12:00
 * auction gate of the day before delivery.
 */
class BenchmarkModel {
public:
    virtual ~BenchmarkModel() = default;
    virtual std::string id() const = 0;
    virtual BenchmarkForecast forecast(const PanelDataset& panel, std::size_t w_begin,
                                       std::size_t target) const = 0;
};

/**
 * @brief Weekly persistent model: the price one week earlier, with a
 * Gaussian density whose variance comes from historical weekly differences
 * at the same hour.
 */
class PersistentModel : public BenchmarkModel {
public:
    std::string id() const override { return "persistent"; }

    BenchmarkForecast forecast(const PanelDataset& panel, std::size_t w_begin,
                               std::size_t target) const override {
        if (target < w_begin + 8) {
            throw InsufficientHistoryError("persistent model needs at least 8 days of history");
        }
        BenchmarkForecast out;
        out.model = id();
        for (int h = 0; h < 24; ++h) {
            const double point = panel.exog(Exog::Price, target - 7, h);
            double ss = 0.0;
            std::size_t count = 0;
            for (std::size_t d = w_begin + 7; d < target; ++d) {
                const double diff =
                    panel.exog(Exog::Price, d, h) - panel.exog(Exog::Price, d - 7, h);
                ss += diff * diff;
                ++count;
            }
            out.point[h] = point;
            out.density[h].weights = {1.0};
            out.density[h].means = {point};
            out.density[h].sds = {std::sqrt(ss / static_cast<double>(count))};
        }
        return out;
    }
};

/**
 * @brief One AR(p) on the hourly-flattened price stream, order selected by
 * AIC on {1..max_order}.
 *
 * The forecast origin is the last observation before the 12:00 auction gate
 * of day target-1, so the horizons for the target day are 13..36 steps.
 */
class UnivariateArModel : public BenchmarkModel {
public:
    explicit UnivariateArModel(int max_order = 700) : max_order_(max_order) {}

    std::string id() const override { return "ar"; }

    BenchmarkForecast forecast(const PanelDataset& panel, std::size_t w_begin,
                               std::size_t target) const override {
        std::vector<double> series;
        series.reserve((target - w_begin) * 24);
        for (std::size_t d = w_begin; d + 1 < target; ++d) {
            for (int h = 0; h < 24; ++h) series.push_back(panel.exog(Exog::Price, d, h));
        }
        for (int h = 0; h <= 11; ++h) series.push_back(panel.exog(Exog::Price, target - 1, h));

        const ArFit fit = fit_ar_yule_walker(series, max_order_);
        const ArForecaster fc{fit, series};
        BenchmarkForecast out;
        out.model = id();
        for (int h = 0; h < 24; ++h) {
            const int steps = 13 + h;
            const double point = fc.point(steps);
            out.point[h] = point;
            out.density[h].weights = {1.0};
            out.density[h].means = {point};
            out.density[h].sds = {std::sqrt(fc.variance(steps))};
        }
        return out;
    }

private:
    int max_order_;
};

/**
 * @brief 24 univariate AR models, one per hour on the daily price series,
 * orders selected by AIC on {1..max_order}, one-step-ahead in days.
 */
class HourlyArModel : public BenchmarkModel {
public:
    explicit HourlyArModel(int max_order = 50) : max_order_(max_order) {}

    std::string id() const override { return "ar24"; }

    BenchmarkForecast forecast(const PanelDataset& panel, std::size_t w_begin,
                               std::size_t target) const override {
        BenchmarkForecast out;
        out.model = id();
        for (int h = 0; h < 24; ++h) {
            std::vector<double> series;
            series.reserve(target - w_begin);
            for (std::size_t d = w_begin; d < target; ++d) {
                series.push_back(panel.exog(Exog::Price, d, h));
            }
            const ArFit fit = fit_ar_yule_walker(series, max_order_);
            const ArForecaster fc{fit, series};
            out.point[h] = fc.point(1);
            out.density[h].weights = {1.0};
            out.density[h].means = {out.point[h]};
            out.density[h].sds = {std::sqrt(fc.variance(1))};
        }
        return out;
    }

private:
    int max_order_;
};

/// Hours with no solar feed-in; the solar regressor is dropped there.
inline bool solar_hour(int h) { return !(h <= 3 || h == 23); }

/**
 * @brief 2-regime Markov switching regression per hour, fitted by EM.
 *
 * Regressors: intercept, lag-1 and lag-7 price, previous-day mean price,
 * and same-day planned generation, wind and solar (solar only for daylight
 * hours). The predictive density is the transition-weighted Gaussian
 * mixture.
 */
class RegimeSwitchingModel : public BenchmarkModel {
public:
    explicit RegimeSwitchingModel(std::uint64_t seed = 7) : seed_(seed) {}

    std::string id() const override { return "regime"; }

    BenchmarkForecast forecast(const PanelDataset& panel, std::size_t w_begin,
                               std::size_t target) const override {
        if (target < w_begin + 9) {
            throw InsufficientHistoryError("regime model needs at least 9 days of history");
        }
        BenchmarkForecast out;
        out.model = id();
        for (int h = 0; h < 24; ++h) {
            const int q = solar_hour(h) ? 7 : 6;
            const std::size_t rows = target - (w_begin + 7);
            Eigen::MatrixXd x(rows, q);
            Eigen::VectorXd y(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t d = w_begin + 7 + r;
                fill_row(panel, d, h, x, r);
                y(r) = panel.exog(Exog::Price, d, h);
            }
            const RegimeFit fit =
                fit_regime_switching(x, y, seed_ + static_cast<std::uint64_t>(h));
            Eigen::MatrixXd xt(1, q);
            fill_row(panel, target, h, xt, 0);
            out.density[h] = regime_predictive(fit, xt.row(0).transpose());
            out.point[h] = out.density[h].mean();
        }
        return out;
    }

private:
    static void fill_row(const PanelDataset& panel, std::size_t d, int h, Eigen::MatrixXd& x,
                         std::size_t r) {
        double day_mean = 0.0;
        for (int j = 0; j < 24; ++j) day_mean += panel.exog(Exog::Price, d - 1, j);
        day_mean /= 24.0;
        x(r, 0) = 1.0;
        x(r, 1) = panel.exog(Exog::Price, d - 1, h);
        x(r, 2) = panel.exog(Exog::Price, d - 7, h);
        x(r, 3) = day_mean;
        x(r, 4) = panel.exog(Exog::Generation, d, h);
        x(r, 5) = panel.exog(Exog::Wind, d, h);
        if (solar_hour(h)) x(r, 6) = panel.exog(Exog::Solar, d, h);
    }

    std::uint64_t seed_;
};

}  // namespace xmodel::bench
