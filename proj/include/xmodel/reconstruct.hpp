#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "xmodel/curve.hpp"
#include "xmodel/errors.hpp"
#include "xmodel/panel.hpp"
#include "xmodel/price_classes.hpp"
#include "xmodel/quantiles.hpp"
#include "xmodel/rng.hpp"

namespace xmodel {

/**
 * @brief Relative frequency that each price carries a positive bid.
 *
 * Estimated per (side, hour, price) over the estimation window; prices
 * never bid have probability zero and are simply absent from the maps.
 */
struct ActivityProfile {
    std::array<std::map<Tick, double>, 24> supply;
    std::array<std::map<Tick, double>, 24> demand;
    bool pooled = false;

    const std::map<Tick, double>& of(Side side, int hour) const {
        return side == Side::Supply ? supply[hour] : demand[hour];
    }

    double probability(Side side, int hour, Tick tick) const {
        const auto& m = of(side, hour);
        auto it = m.find(tick);
        return it == m.end() ? 0.0 : it->second;
    }
};

/**
 * @brief Counts bid occurrences over [day_begin, day_end).
 *
 * With pool_hours the relative frequency is computed across all 24 auctions
 * of a day jointly and shared by every hour.
 */
inline ActivityProfile estimate_activity(const PanelDataset& panel, std::size_t day_begin,
                                         std::size_t day_end, bool pool_hours = false) {
    if (day_begin >= day_end || day_end > panel.n_days()) {
        throw EmptyPanelError("estimate_activity: empty or invalid day range");
    }
    ActivityProfile profile;
    profile.pooled = pool_hours;
    const double days = static_cast<double>(day_end - day_begin);
    for (std::size_t d = day_begin; d < day_end; ++d) {
        for (int h = 0; h < 24; ++h) {
            for (const auto& [tick, v] : panel.cell(d, h).supply.entries()) {
                profile.supply[h][tick] += 1.0;
            }
            for (const auto& [tick, v] : panel.cell(d, h).demand.entries()) {
                profile.demand[h][tick] += 1.0;
            }
        }
    }
    if (pool_hours) {
        std::map<Tick, double> s_all, d_all;
        for (int h = 0; h < 24; ++h) {
            for (const auto& [t, c] : profile.supply[h]) s_all[t] += c;
            for (const auto& [t, c] : profile.demand[h]) d_all[t] += c;
        }
        for (auto& [t, c] : s_all) c /= days * 24.0;
        for (auto& [t, c] : d_all) c /= days * 24.0;
        for (int h = 0; h < 24; ++h) {
            profile.supply[h] = s_all;
            profile.demand[h] = d_all;
        }
    } else {
        for (int h = 0; h < 24; ++h) {
            for (auto& [t, c] : profile.supply[h]) c /= days;
            for (auto& [t, c] : profile.demand[h]) c /= days;
        }
    }
    return profile;
}

/// Default activity threshold for point reconstructions: active when the
/// price occurs on average at least twice a day.
inline constexpr double kDefaultActivityThreshold = 1.0 / 12.0;

/**
 * @brief One fully reconstructed hourly auction.
 */
struct ReconstructedAuction {
    VolumeSurface supply{Side::Supply};
    VolumeSurface demand{Side::Demand};
    PriceCurve supply_curve;
    PriceCurve demand_curve;
    Intersection clearing;
    int clamped_classes = 0;   // negative class forecasts clamped to zero
    int fallback_classes = 0;  // classes redistributed to their bound price
};

namespace detail {

/**
 * Redistributes forecasted class volumes over prices: within each class the
 * active prices share the class volume proportionally to their mean bid
 * volume. A class whose active mass is empty places its whole volume at the
 * class bound so curve totals stay intact.
 */
inline void reconstruct_side(const std::vector<double>& class_volumes,
                             const ClassPartition& partition, const MeanSurface& mean,
                             const std::vector<char>& active_by_tick_index,
                             const std::vector<Tick>& mean_ticks, VolumeSurface& out,
                             int& clamped, int& fallback) {
    if (class_volumes.size() != partition.n_classes()) {
        throw ReconstructionError("class forecast count does not match the partition");
    }
    const std::size_t n = partition.n_classes();
    std::vector<double> denom(n, 0.0);
    std::vector<std::size_t> class_of_entry(mean_ticks.size());
    {
        std::size_t idx = 0;
        for (const auto& [tick, vbar] : mean.values) {
            const std::size_t c = partition.class_of(tick);
            class_of_entry[idx] = c;
            if (active_by_tick_index[idx]) denom[c] += vbar;
            ++idx;
        }
    }
    std::vector<double> volume(class_volumes);
    for (std::size_t c = 0; c < n; ++c) {
        if (volume[c] < 0.0) {
            volume[c] = 0.0;
            ++clamped;
        }
    }
    std::size_t idx = 0;
    for (const auto& [tick, vbar] : mean.values) {
        const std::size_t c = class_of_entry[idx];
        if (active_by_tick_index[idx] && denom[c] > 0.0 && volume[c] > 0.0) {
            out.add(tick, volume[c] * vbar / denom[c]);
        }
        ++idx;
    }
    for (std::size_t c = 0; c < n; ++c) {
        if (denom[c] <= 0.0 && volume[c] > 0.0) {
            out.add(partition.bound_tick(c), volume[c]);
            ++fallback;
        }
    }
}

inline std::vector<Tick> mean_tick_list(const MeanSurface& mean) {
    std::vector<Tick> ticks;
    ticks.reserve(mean.values.size());
    for (const auto& [tick, v] : mean.values) ticks.push_back(tick);
    return ticks;
}

}  // namespace detail

/// Inputs shared by every reconstruction of one estimation window.
struct ReconstructionContext {
    const PriceGrid* grid = nullptr;
    const ClassPartition* supply_partition = nullptr;
    const ClassPartition* demand_partition = nullptr;
    const MeanSurface* supply_mean = nullptr;
    const MeanSurface* demand_mean = nullptr;
    const ActivityProfile* activity = nullptr;
};

namespace detail {

inline ReconstructedAuction reconstruct_with_activity(
    const ReconstructionContext& ctx, int hour, const std::vector<double>& supply_volumes,
    const std::vector<double>& demand_volumes, const std::vector<char>& supply_active,
    const std::vector<char>& demand_active) {
    ReconstructedAuction rec;
    const std::vector<Tick> s_ticks = mean_tick_list(*ctx.supply_mean);
    const std::vector<Tick> d_ticks = mean_tick_list(*ctx.demand_mean);
    reconstruct_side(supply_volumes, *ctx.supply_partition, *ctx.supply_mean, supply_active,
                     s_ticks, rec.supply, rec.clamped_classes, rec.fallback_classes);
    reconstruct_side(demand_volumes, *ctx.demand_partition, *ctx.demand_mean, demand_active,
                     d_ticks, rec.demand, rec.clamped_classes, rec.fallback_classes);
    if (rec.supply.empty() || rec.demand.empty()) {
        throw ReconstructionError("all classes empty on one side at hour " + std::to_string(hour));
    }
    rec.supply_curve = aggregate_curve(rec.supply, *ctx.grid);
    rec.demand_curve = aggregate_curve(rec.demand, *ctx.grid);
    rec.clearing = intersect(rec.supply_curve, rec.demand_curve);
    return rec;
}

// Activity vectors are indexed by the mean surface's ascending tick order so
// they stay aligned with the redistribution loop.

inline std::vector<char> threshold_activity(const MeanSurface& mean, const ActivityProfile& act,
                                            int hour, double threshold) {
    std::vector<char> active;
    active.reserve(mean.values.size());
    for (const auto& [tick, v] : mean.values) {
        active.push_back(act.probability(mean.side, hour, tick) >= threshold ? 1 : 0);
    }
    return active;
}

inline std::vector<char> bernoulli_activity(const MeanSurface& mean, const ActivityProfile& act,
                                            int hour, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<char> active;
    active.reserve(mean.values.size());
    for (const auto& [tick, v] : mean.values) {
        const double pi = act.probability(mean.side, hour, tick);
        active.push_back(pi >= 1.0 ? 1 : (unif(rng) < pi ? 1 : 0));
    }
    return active;
}

}  // namespace detail

/**
 * @brief Deterministic point reconstruction: a price is active when its
 * activity probability reaches the threshold (default 1/12, inclusive).
 */
inline ReconstructedAuction reconstruct_point(const ReconstructionContext& ctx, int hour,
                                              const std::vector<double>& supply_volumes,
                                              const std::vector<double>& demand_volumes,
                                              double threshold = kDefaultActivityThreshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ConfigError("activity threshold must lie in [0, 1]");
    }
    const auto s_active =
        detail::threshold_activity(*ctx.supply_mean, *ctx.activity, hour, threshold);
    const auto d_active =
        detail::threshold_activity(*ctx.demand_mean, *ctx.activity, hour, threshold);
    return detail::reconstruct_with_activity(ctx, hour, supply_volumes, demand_volumes, s_active,
                                             d_active);
}

/**
 * @brief Stochastic reconstruction for one bootstrap draw: activity is
 * sampled per price as independent Bernoulli variables.
 */
inline ReconstructedAuction reconstruct_draw(const ReconstructionContext& ctx, int hour,
                                             const std::vector<double>& supply_volumes,
                                             const std::vector<double>& demand_volumes,
                                             std::mt19937_64& rng) {
    const auto s_active = detail::bernoulli_activity(*ctx.supply_mean, *ctx.activity, hour, rng);
    const auto d_active = detail::bernoulli_activity(*ctx.demand_mean, *ctx.activity, hour, rng);
    return detail::reconstruct_with_activity(ctx, hour, supply_volumes, demand_volumes, s_active,
                                             d_active);
}

/**
 * @brief Point and quantile forecast of the market clearing price and
 * volume of one hourly auction.
 */
struct PriceForecast {
    Intersection point;
    std::vector<double> levels;
    std::vector<double> price_quantiles;
    std::vector<double> volume_quantiles;
    std::size_t excluded_draws = 0;  // draws whose curves did not cross
    bool unreliable = false;         // more than 1% of draws excluded
};

/**
 * @brief Collapses draw clearing results into empirical quantiles.
 *
 * NoCrossing draws were excluded upstream and are accounted for here; when
 * they exceed 1% of the requested draws the forecast is flagged unreliable.
 */
inline PriceForecast price_forecast(const Intersection& point, std::vector<double> draw_prices,
                                    std::vector<double> draw_volumes, std::size_t excluded,
                                    std::vector<double> levels = report_quantile_levels()) {
    if (draw_prices.empty()) throw ReconstructionError("no successful draws to summarize");
    PriceForecast out;
    out.point = point;
    out.levels = std::move(levels);
    std::sort(draw_prices.begin(), draw_prices.end());
    std::sort(draw_volumes.begin(), draw_volumes.end());
    out.price_quantiles.reserve(out.levels.size());
    out.volume_quantiles.reserve(out.levels.size());
    for (double level : out.levels) {
        out.price_quantiles.push_back(quantile_sorted(draw_prices, level));
        out.volume_quantiles.push_back(quantile_sorted(draw_volumes, level));
    }
    out.excluded_draws = excluded;
    const std::size_t total = draw_prices.size() + excluded;
    out.unreliable = excluded * 100 > total;
    return out;
}

}  // namespace xmodel
