#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "xmodel/errors.hpp"
#include "xmodel/panel.hpp"
#include "xmodel/rng.hpp"

namespace xmodel {

/**
 * @brief Controls for the synthetic auction generator.
 *
 * The generator plants a sparse autoregressive structure with weekday and
 * renewable effects directly at the level of bid groups (contiguous price
 * ranges that later map onto price classes), then spreads each group volume
 * across its prices through a fixed activity profile. Ground truth is
 * returned alongside the panel so model-recovery tests can check against
 * the planted recursion.
 */
struct SyntheticConfig {
    int days = 120;
    Date start{2015, 1, 1};
    int interior_groups = 3;       // per side, between the must-run and tail stacks
    double group_volume = 1000.0;  // mean volume carried by an interior group
    double mustrun_volume = 6500.0;
    double tail_volume = 200.0;
    double noise_scale = 1.0;   // multiplies every innovation std dev
    double sunday_bump = 0.0;   // extra Sunday MW planted on the supply must-run group
    double weekday_amp = 120.0; // amplitude of the default weekday pattern
    double season_amp = 0.10;   // relative amplitude of the hourly pattern
    double phi1 = 0.60;         // planted own lag-1 coefficient (interior groups)
    double phi7 = 0.25;         // planted own lag-7 coefficient
    double renew_beta = 0.35;   // supply coupling to wind+solar of the same hour
    PriceGrid grid = PriceGrid::epex();

    /// The V_star that makes the data-driven partition coincide with the groups.
    double v_star() const { return group_volume; }
};

/// Planted parameters for one bid group; the unit of ground truth.
struct SyntheticGroup {
    Side side = Side::Supply;
    struct Slot {
        Tick tick = 0;
        double weight = 0.0;    // proportional share of the group volume
        double activity = 1.0;  // probability the price carries a bid
    };
    std::vector<Slot> slots;  // ascending tick; exactly one slot has activity 1
    double base = 0.0;
    std::array<double, 24> season{};          // multiplicative hourly factor
    std::array<double, 7> weekday{};          // additive offset by weekday number - 1
    std::array<double, 24> renew_center{};    // centering level for the renewables term
    double phi1 = 0.0, phi7 = 0.0;
    double renew_beta = 0.0;
    double sigma = 0.0;

    /// Deterministic mean level of the recursion at (d, h).
    double mean_level(int weekday_number, int hour, double renewables) const {
        return base * season[hour] + weekday[weekday_number - 1] +
               renew_beta * (renewables - renew_center[hour]);
    }
};

/// Ground-truth sidecar produced with every synthetic panel.
struct SyntheticTruth {
    std::vector<SyntheticGroup> groups;                  // supply groups then demand groups
    std::vector<std::vector<std::array<double, 24>>> group_volumes;  // [group][day][hour]
    int burn_in_days = 7;  // the recursion holds exactly for d >= burn_in_days
};

namespace detail {

inline std::array<double, 24> hour_season(double amp, double phase) {
    std::array<double, 24> s{};
    for (int h = 0; h < 24; ++h) {
        s[h] = 1.0 + amp * std::sin(2.0 * M_PI * (h - phase) / 24.0);
    }
    return s;
}

inline std::array<double, 7> weekday_pattern(double amp, double scale) {
    // Working days high, weekend low; Mon..Sun.
    const std::array<double, 7> shape = {0.20, 0.25, 0.25, 0.20, 0.10, -0.40, -0.60};
    std::array<double, 7> w{};
    for (int i = 0; i < 7; ++i) w[i] = amp * scale * shape[i];
    return w;
}

inline double solar_bell(int hour) {
    if (hour <= 6 || hour >= 18) return 0.0;
    return std::sin(M_PI * (hour - 6) / 12.0);
}

}  // namespace detail

/**
 * @brief Generates a synthetic panel with known class-level dynamics.
 *
 * Deterministic given (config, seed). Requires at least 60 days so that the
 * 36-day lag depth leaves a usable estimation window.
 */
inline std::pair<PanelDataset, SyntheticTruth> generate_synthetic(const SyntheticConfig& config,
                                                                  std::uint64_t seed) {
    if (config.days < 60) {
        throw ConfigError("synthetic panel needs at least 60 days for lag depth 36");
    }
    if (config.interior_groups < 1) throw ConfigError("need at least one interior group per side");
    const int D = config.days;
    const PriceGrid& grid = config.grid;

    // --- exogenous processes -------------------------------------------------
    std::vector<std::array<double, 24>> wind(D), solar(D), generation(D);
    {
        std::mt19937_64 rng = substream(seed, 1);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double wind_level = 0.0;  // daily AR(1) component
        for (int d = 0; d < D; ++d) {
            wind_level = 0.7 * wind_level + 0.3 * gauss(rng);
            const double wind_season = 900.0 + 420.0 * std::sin(2.0 * M_PI * d / 31.0 + 1.3);
            const double solar_season = 1.0 + 0.35 * std::sin(2.0 * M_PI * (d - 80.0) / 365.0);
            const int wd = config.start.plus_days(d).weekday();
            for (int h = 0; h < 24; ++h) {
                const double wh = wind_season + 120.0 * std::sin(2.0 * M_PI * (h - 3) / 24.0) +
                                  320.0 * wind_level +
                                  60.0 * config.noise_scale * gauss(rng);
                wind[d][h] = std::max(0.0, wh);
                const double sh = 1400.0 * detail::solar_bell(h) * solar_season *
                                  (1.0 + 0.12 * config.noise_scale * gauss(rng));
                solar[d][h] = std::max(0.0, sh);
                generation[d][h] = 5200.0 + 650.0 * std::sin(2.0 * M_PI * (h - 9) / 24.0) -
                                   (wd >= 6 ? 400.0 : 0.0) +
                                   150.0 * config.noise_scale * gauss(rng);
            }
        }
    }
    std::array<double, 24> renew_center{};
    for (int h = 0; h < 24; ++h) {
        double sum = 0.0;
        for (int d = 0; d < D; ++d) sum += wind[d][h] + solar[d][h];
        renew_center[h] = sum / D;
    }

    // --- group architecture --------------------------------------------------
    SyntheticTruth truth;
    const int K = config.interior_groups;
    auto make_interior_slots = [&](Side side, double center) {
        std::vector<SyntheticGroup::Slot> slots;
        const double sgn = side == Side::Supply ? -1.0 : 1.0;
        // Satellite prices sit on the accumulation side of the anchor so the
        // anchor is always the last price of the group in aggregation order.
        slots.push_back({grid.index_of(center + sgn * 4.1), 0.08, 0.25});
        slots.push_back({grid.index_of(center + sgn * 2.5), 0.10, 0.50});
        slots.push_back({grid.index_of(center + sgn * 1.0), 0.07, 0.35});
        slots.push_back({grid.index_of(center + sgn * 0.5), 0.09, 0.70});
        slots.push_back({grid.index_of(center + sgn * 0.1), 0.06, 0.15});
        slots.push_back({grid.index_of(center), 0.60, 1.0});
        return slots;
    };

    auto add_group = [&](SyntheticGroup g) { truth.groups.push_back(std::move(g)); };

    for (Side side : {Side::Supply, Side::Demand}) {
        const bool supply = side == Side::Supply;
        // Must-run stack at the price bound that is always executed.
        {
            SyntheticGroup g;
            g.side = side;
            g.slots = {{grid.index_of(supply ? grid.p_min() : grid.p_max()), 1.0, 1.0}};
            g.base = config.mustrun_volume;
            g.season = detail::hour_season(1.4 * config.season_amp, supply ? 4.0 : 9.0);
            g.weekday = detail::weekday_pattern(config.weekday_amp, supply ? -0.6 : 1.0);
            if (supply) g.weekday[6] += config.sunday_bump;
            g.renew_center = renew_center;
            g.phi1 = 0.50;
            g.phi7 = 0.35;
            g.renew_beta = supply ? 0.5 * config.renew_beta : 0.0;
            g.sigma = 60.0 * config.noise_scale;
            add_group(std::move(g));
        }
        for (int k = 0; k < K; ++k) {
            SyntheticGroup g;
            g.side = side;
            const double center = supply ? 15.0 + 20.0 * k : 62.0 - 20.0 * k;
            g.slots = make_interior_slots(side, center);
            g.base = config.group_volume;
            g.season = detail::hour_season(config.season_amp, 3.0 + 2.5 * k + (supply ? 0.0 : 6.0));
            g.weekday = detail::weekday_pattern(config.weekday_amp, supply ? 0.4 : 0.8);
            g.renew_center = renew_center;
            g.phi1 = config.phi1;
            g.phi7 = config.phi7;
            g.renew_beta = supply ? config.renew_beta : 0.0;
            g.sigma = 28.0 * config.noise_scale;
            add_group(std::move(g));
        }
        {
            SyntheticGroup g;
            g.side = side;
            if (supply) {
                g.slots = {{grid.index_of(2899.9), 0.20, 0.40},
                           {grid.index_of(2950.0), 0.20, 0.60},
                           {grid.index_of(grid.p_max()), 0.60, 1.0}};
            } else {
                g.slots = {{grid.index_of(grid.p_min()), 0.60, 1.0},
                           {grid.index_of(-450.0), 0.20, 0.60},
                           {grid.index_of(-400.1), 0.20, 0.40}};
            }
            g.base = config.tail_volume;
            g.season = detail::hour_season(0.5 * config.season_amp, 7.0);
            g.weekday = detail::weekday_pattern(config.weekday_amp, 0.1);
            g.renew_center = renew_center;
            g.phi1 = 0.30;
            g.phi7 = 0.20;
            g.renew_beta = 0.0;
            g.sigma = 8.0 * config.noise_scale;
            add_group(std::move(g));
        }
    }

    // --- planted group recursions --------------------------------------------
    const std::size_t n_groups = truth.groups.size();
    truth.group_volumes.assign(n_groups, std::vector<std::array<double, 24>>(D));
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
        const SyntheticGroup& g = truth.groups[gi];
        std::mt19937_64 rng = substream(seed, 2, gi);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto& vols = truth.group_volumes[gi];
        for (int d = 0; d < D; ++d) {
            const int wd = config.start.plus_days(d).weekday();
            for (int h = 0; h < 24; ++h) {
                const double renew = wind[d][h] + solar[d][h];
                const double m = g.mean_level(wd, h, renew);
                double x = m;
                if (d >= truth.burn_in_days) {
                    const int wd1 = config.start.plus_days(d - 1).weekday();
                    const int wd7 = config.start.plus_days(d - 7).weekday();
                    const double m1 =
                        g.mean_level(wd1, h, wind[d - 1][h] + solar[d - 1][h]);
                    const double m7 =
                        g.mean_level(wd7, h, wind[d - 7][h] + solar[d - 7][h]);
                    x = m + g.phi1 * (vols[d - 1][h] - m1) + g.phi7 * (vols[d - 7][h] - m7) +
                        g.sigma * gauss(rng);
                }
                vols[d][h] = std::max(x, 1.0);
            }
        }
    }

    // --- spread groups into bid surfaces -------------------------------------
    PanelDataset panel(grid);
    std::vector<std::mt19937_64> act_rng;
    act_rng.reserve(n_groups);
    for (std::size_t gi = 0; gi < n_groups; ++gi) act_rng.push_back(substream(seed, 3, gi));

    for (int d = 0; d < D; ++d) {
        std::array<HourCell, 24> cells;
        for (int h = 0; h < 24; ++h) {
            for (std::size_t gi = 0; gi < n_groups; ++gi) {
                const SyntheticGroup& g = truth.groups[gi];
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                double active_weight = 0.0;
                std::vector<bool> active(g.slots.size());
                for (std::size_t s = 0; s < g.slots.size(); ++s) {
                    active[s] = g.slots[s].activity >= 1.0 || unif(act_rng[gi]) < g.slots[s].activity;
                    if (active[s]) active_weight += g.slots[s].weight;
                }
                const double total = truth.group_volumes[gi][d][h];
                VolumeSurface& surf = cells[h].surface(g.side);
                for (std::size_t s = 0; s < g.slots.size(); ++s) {
                    if (!active[s]) continue;
                    surf.add(g.slots[s].tick, total * g.slots[s].weight / active_weight);
                }
            }
        }
        panel.append_day(config.start.plus_days(d), std::move(cells));
    }

    panel.set_exog(Exog::Wind, std::move(wind));
    panel.set_exog(Exog::Solar, std::move(solar));
    panel.set_exog(Exog::Generation, std::move(generation));
    panel.ensure_price_volume();
    return {std::move(panel), std::move(truth)};
}

}  // namespace xmodel
