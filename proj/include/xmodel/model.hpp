#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "xmodel/errors.hpp"
#include "xmodel/features.hpp"
#include "xmodel/lasso.hpp"
#include "xmodel/rng.hpp"

namespace xmodel {

/**
 * @brief Lasso-estimated regression for one (class process, hour) pair.
 *
 * Coefficients are stored against the deterministic column enumeration of
 * enumerate_columns(space, process, hour), already rescaled back to the
 * unscaled regressors. Residuals are kept per estimation row (in raw volume
 * units) for the day-block bootstrap.
 */
struct FittedClassModel {
    int process = 0;
    int hour = 0;
    double lambda = 0.0;
    double bic = 0.0;
    int df = 0;
    double sigma2 = 0.0;   // residual variance estimate, RSS / (rows - df)
    double mu = 0.0;       // sample mean of the target over the window
    double y_scale = 1.0;  // response std dev used by standardization
    std::vector<std::pair<std::uint32_t, double>> coef;  // column index -> coefficient
    std::vector<std::uint32_t> dropped_columns;          // constant columns, recorded for audit
    std::vector<double> residuals;                       // raw units, one per design row
    std::vector<std::size_t> residual_days;              // panel day per design row
};

/**
 * @brief Fits the model of process m at hour h on the window in `panel`.
 *
 * Standardizes, solves the lasso path on the exponentially decaying grid,
 * selects the penalty by BIC and rescales the winner back to raw units.
 */
inline FittedClassModel fit_class_model(const CenteredPanel& panel, int m, int h,
                                        const LassoSettings& settings) {
    const Design design = build_design(panel, m, h);
    const StandardizedDesign sd = standardize(design);
    const std::size_t rows = static_cast<std::size_t>(design.x.rows());

    FittedClassModel model;
    model.process = m;
    model.hour = h;
    model.mu = panel.mean(m, h);
    model.y_scale = sd.y_scale;
    model.dropped_columns.assign(sd.dropped.begin(), sd.dropped.end());
    model.residual_days = design.row_days;

    const double lambda_max = lasso_lambda_max(sd.x, sd.y);
    if (sd.x.cols() == 0 || lambda_max <= 0.0) {
        // Nothing to regress on (or the response is orthogonal to every
        // column); the null model with forecast mu is exact.
        model.lambda = 0.0;
        model.df = 0;
        Eigen::VectorXd resid = design.y;
        model.residuals.assign(resid.data(), resid.data() + resid.size());
        model.sigma2 = resid.squaredNorm() / std::max<std::size_t>(rows, 1);
        model.bic = rows * std::log(std::max(model.sigma2, 1e-300));
        return model;
    }

    const std::vector<double> grid = lambda_grid(lambda_max, settings);
    const LassoPath path = lasso_path(sd.x, sd.y, grid, settings);
    const std::size_t pick = select_lambda(path, rows);
    const LassoPathEntry& entry = path.entries[pick];

    model.lambda = entry.lambda;
    model.bic = lasso_bic(entry, rows);
    model.df = entry.df;
    for (Eigen::Index c = 0; c < entry.beta.size(); ++c) {
        if (entry.beta(c) != 0.0) {
            const std::size_t original = sd.kept[static_cast<std::size_t>(c)];
            const double unscaled = entry.beta(c) * sd.y_scale / sd.column_scale[c];
            model.coef.emplace_back(static_cast<std::uint32_t>(original), unscaled);
        }
    }

    Eigen::VectorXd fitted = Eigen::VectorXd::Zero(design.x.rows());
    for (const auto& [col, value] : model.coef) {
        fitted += value * design.x.col(static_cast<Eigen::Index>(col));
    }
    Eigen::VectorXd resid = design.y - fitted;
    model.residuals.assign(resid.data(), resid.data() + resid.size());
    const std::size_t dof = rows > static_cast<std::size_t>(model.df)
                                ? rows - static_cast<std::size_t>(model.df)
                                : 1;
    model.sigma2 = resid.squaredNorm() / static_cast<double>(dof);
    return model;
}

/**
 * @brief Day-ahead point forecast of the bid volume X for the model's
 * (process, hour), at the day just past the panel window.
 */
inline double point_forecast(const FittedClassModel& model, const CenteredPanel& panel) {
    const std::size_t target = panel.window_end();
    const std::vector<ColumnKey> columns =
        enumerate_columns(panel.space(), model.process, model.hour);
    const int wd = panel.weekday_of_day(target);
    double y_hat = 0.0;
    for (const auto& [col, value] : model.coef) {
        const ColumnKey& key = columns.at(col);
        if (key.kind == ColumnKey::Kind::Weekday) {
            y_hat += value * weekday_indicator(wd, key.k);
        } else {
            y_hat += value * panel.value(key.l, target - key.k, key.j);
        }
    }
    return y_hat + model.mu;
}

/**
 * @brief Point forecast plus day-block bootstrap draws for every class.
 *
 * point[c][h] and draws[b][c][h] are raw bid volumes (supply classes first,
 * then demand classes, matching the FeatureSpace process order).
 */
struct ForecastSample {
    std::vector<std::array<double, 24>> point;
    std::vector<std::vector<std::array<double, 24>>> draws;
    std::vector<std::size_t> drawn_days;  // historical day index used by each draw
};

/**
 * @brief Residual bootstrap over whole days.
 *
 * Each draw picks one historical estimation day uniformly and adds that
 * day's residual vector across all classes and all 24 hours to the point
 * forecasts, preserving the within-day residual correlation structure. The
 * per-draw sampling streams depend only on (seed, draw index), so results
 * do not depend on scheduling.
 */
inline ForecastSample bootstrap_forecast(
    const std::vector<std::array<FittedClassModel, 24>>& models, const CenteredPanel& panel,
    int draws, std::uint64_t seed) {
    if (draws < 1) throw ConfigError("bootstrap draw count must be at least 1");
    if (models.empty()) throw ConfigError("no fitted models");

    const std::size_t n_classes = models.size();
    ForecastSample sample;
    sample.point.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (int h = 0; h < 24; ++h) {
            sample.point[c][h] = point_forecast(models[c][h], panel);
        }
    }

    const std::vector<std::size_t>& days = models.front().front().residual_days;
    for (const auto& per_hour : models) {
        for (const auto& m : per_hour) {
            if (m.residual_days != days) {
                throw ConfigError("residual matrices are not aligned by day across models");
            }
        }
    }

    sample.draws.resize(static_cast<std::size_t>(draws));
    sample.drawn_days.resize(static_cast<std::size_t>(draws));
    std::uniform_int_distribution<std::size_t> pick(0, days.size() - 1);
    for (int b = 0; b < draws; ++b) {
        std::mt19937_64 rng = substream(seed, 0x626f6f74ULL, static_cast<std::uint64_t>(b));
        const std::size_t row = pick(rng);
        sample.drawn_days[static_cast<std::size_t>(b)] = days[row];
        auto& draw = sample.draws[static_cast<std::size_t>(b)];
        draw.resize(n_classes);
        for (std::size_t c = 0; c < n_classes; ++c) {
            for (int h = 0; h < 24; ++h) {
                draw[c][h] = sample.point[c][h] + models[c][h].residuals[row];
            }
        }
    }
    return sample;
}

}  // namespace xmodel
