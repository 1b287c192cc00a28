#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xmodel/model.hpp"
#include "xmodel/parallel.hpp"
#include "xmodel/price_classes.hpp"
#include "xmodel/reconstruct.hpp"

namespace xmodel {

/// Lasso defaults for production fits: the path is truncated once the BIC
/// has stalled, which skips the expensive dense tail the selection can no
/// longer reach.
inline LassoSettings pipeline_lasso_defaults() {
    LassoSettings s;
    s.bic_patience = 12;
    return s;
}

/// Everything the forecasting pipeline can be tuned with.
struct PipelineSettings {
    std::size_t window_days = 730;
    double v_star = 1000.0;
    LassoSettings lasso = pipeline_lasso_defaults();
    double threshold = kDefaultActivityThreshold;
    bool pool_activity_hours = false;
    int bootstrap_draws = 10000;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = all hardware threads
};

/**
 * @brief Output of one rolling-window estimation: partitions, means,
 * activity and all per-(class, hour) fitted models, ready to forecast the
 * day right after the window.
 */
struct WindowFit {
    FeatureSpace space;
    ClassPartition supply_partition;
    ClassPartition demand_partition;
    MeanSurface supply_mean;
    MeanSurface demand_mean;
    ActivityProfile activity;
    CenteredPanel centered;
    std::vector<std::array<FittedClassModel, 24>> models;  // [class][hour]
    std::size_t window_begin = 0;
    std::size_t window_end = 0;  // also the forecast target day

    ReconstructionContext context(const PriceGrid& grid) const {
        return ReconstructionContext{&grid,       &supply_partition, &demand_partition,
                                     &supply_mean, &demand_mean,     &activity};
    }
};

/**
 * @brief Runs the full estimation stack on the window [w_begin, w_end):
 * price classes from the window's mean curves, class volume series,
 * activity profile, and one lasso fit per (class, hour).
 */
inline WindowFit fit_window(const PanelDataset& panel, std::size_t w_begin, std::size_t w_end,
                            const PipelineSettings& settings) {
    auto [s_mean, d_mean] = mean_surfaces(panel, w_begin, w_end);
    const PriceGrid& grid = panel.grid();
    ClassPartition s_part = build_partition(mean_curve(s_mean, grid), settings.v_star, grid);
    ClassPartition d_part = build_partition(mean_curve(d_mean, grid), settings.v_star, grid);
    const ClassVolumeSeries volumes = class_volumes(panel, s_part, d_part);

    FeatureSpace space;
    space.m_s = static_cast<int>(s_part.n_classes());
    space.m_d = static_cast<int>(d_part.n_classes());

    WindowFit fit{space,
                  std::move(s_part),
                  std::move(d_part),
                  std::move(s_mean),
                  std::move(d_mean),
                  estimate_activity(panel, w_begin, w_end, settings.pool_activity_hours),
                  CenteredPanel(panel, volumes, space, w_begin, w_end),
                  {},
                  w_begin,
                  w_end};

    const int n_classes = space.n_classes();
    fit.models.resize(static_cast<std::size_t>(n_classes));
    parallel_for(static_cast<std::size_t>(n_classes) * 24, settings.threads, [&](std::size_t i) {
        const int m = static_cast<int>(i / 24);
        const int h = static_cast<int>(i % 24);
        fit.models[static_cast<std::size_t>(m)][static_cast<std::size_t>(h)] =
            fit_class_model(fit.centered, m, h, settings.lasso);
    });
    return fit;
}

/// Point and probabilistic clearing forecast for all 24 hours of one day.
struct DayForecast {
    std::size_t target_day = 0;
    ForecastSample sample;  // class-volume point forecasts and draws
    std::array<ReconstructedAuction, 24> point_auctions;
    std::array<std::optional<PriceForecast>, 24> hours;  // empty when B = 0
};

namespace detail {

inline std::vector<double> side_slice(const std::vector<std::array<double, 24>>& values, int from,
                                      int count, int hour) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) out[static_cast<std::size_t>(c)] = values[from + c][hour];
    return out;
}

}  // namespace detail

/**
 * @brief Forecasts the day right after the fitted window.
 *
 * The point path thresholds the activity profile; each bootstrap draw gets
 * its own Bernoulli activity stream keyed by (seed, hour, draw), so results
 * are reproducible no matter how hours are scheduled. Draws whose curves do
 * not cross are excluded and counted.
 */
inline DayForecast forecast_day(const PanelDataset& panel, const WindowFit& fit,
                                const PipelineSettings& settings) {
    DayForecast out;
    out.target_day = fit.window_end;
    const int m_s = fit.space.m_s;
    const int m_d = fit.space.m_d;

    if (settings.bootstrap_draws >= 1) {
        out.sample =
            bootstrap_forecast(fit.models, fit.centered, settings.bootstrap_draws, settings.seed);
    } else {
        out.sample.point.resize(static_cast<std::size_t>(m_s + m_d));
        for (int c = 0; c < m_s + m_d; ++c) {
            for (int h = 0; h < 24; ++h) {
                out.sample.point[static_cast<std::size_t>(c)][h] =
                    point_forecast(fit.models[static_cast<std::size_t>(c)][h], fit.centered);
            }
        }
    }

    const ReconstructionContext ctx = fit.context(panel.grid());
    parallel_for(24, settings.threads, [&](std::size_t hi) {
        const int h = static_cast<int>(hi);
        out.point_auctions[hi] =
            reconstruct_point(ctx, h, detail::side_slice(out.sample.point, 0, m_s, h),
                              detail::side_slice(out.sample.point, m_s, m_d, h),
                              settings.threshold);
        if (settings.bootstrap_draws < 1) return;

        std::vector<double> prices, volumes;
        prices.reserve(out.sample.draws.size());
        volumes.reserve(out.sample.draws.size());
        std::size_t excluded = 0;
        for (std::size_t b = 0; b < out.sample.draws.size(); ++b) {
            std::mt19937_64 rng =
                substream(settings.seed, 0x7265636eULL + static_cast<std::uint64_t>(h), b);
            try {
                const ReconstructedAuction rec = reconstruct_draw(
                    ctx, h, detail::side_slice(out.sample.draws[b], 0, m_s, h),
                    detail::side_slice(out.sample.draws[b], m_s, m_d, h), rng);
                prices.push_back(rec.clearing.price);
                volumes.push_back(rec.clearing.volume);
            } catch (const NoCrossingError&) {
                ++excluded;
            }
        }
        out.hours[hi] = price_forecast(out.point_auctions[hi].clearing, std::move(prices),
                                       std::move(volumes), excluded);
    });
    return out;
}

}  // namespace xmodel
