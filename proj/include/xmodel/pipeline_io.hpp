#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "xmodel/pipeline.hpp"
#include "xmodel/text.hpp"

namespace xmodel {

using json = nlohmann::ordered_json;

namespace detail {

inline json surface_to_json(const MeanSurface& mean, const PriceGrid& grid) {
    json arr = json::array();
    for (const auto& [tick, v] : mean.values) {
        arr.push_back(json::array({grid.price_at(tick), v}));
    }
    return arr;
}

inline MeanSurface surface_from_json(const json& arr, Side side, const PriceGrid& grid) {
    MeanSurface mean{side, {}};
    for (const auto& item : arr) {
        mean.values[grid.index_of(item.at(0).get<double>())] = item.at(1).get<double>();
    }
    return mean;
}

inline json partition_to_json(const ClassPartition& partition, const PriceGrid& grid) {
    json arr = json::array();
    for (std::size_t c = 0; c < partition.n_classes(); ++c) {
        arr.push_back(grid.price_at(partition.bound_tick(c)));
    }
    return arr;
}

inline std::vector<Tick> bounds_from_json(const json& arr, const PriceGrid& grid) {
    std::vector<Tick> out;
    for (const auto& item : arr) out.push_back(grid.index_of(item.get<double>()));
    return out;
}

inline json activity_to_json(const ActivityProfile& activity, const PriceGrid& grid) {
    json out;
    out["pooled"] = activity.pooled;
    for (Side side : {Side::Supply, Side::Demand}) {
        json hours = json::array();
        for (int h = 0; h < 24; ++h) {
            json arr = json::array();
            for (const auto& [tick, pi] : activity.of(side, h)) {
                arr.push_back(json::array({grid.price_at(tick), pi}));
            }
            hours.push_back(std::move(arr));
        }
        out[side == Side::Supply ? "supply" : "demand"] = std::move(hours);
    }
    return out;
}

inline ActivityProfile activity_from_json(const json& in, const PriceGrid& grid) {
    ActivityProfile activity;
    activity.pooled = in.at("pooled").get<bool>();
    for (Side side : {Side::Supply, Side::Demand}) {
        const json& hours = in.at(side == Side::Supply ? "supply" : "demand");
        for (int h = 0; h < 24; ++h) {
            auto& m = side == Side::Supply ? activity.supply[h] : activity.demand[h];
            for (const auto& item : hours.at(h)) {
                m[grid.index_of(item.at(0).get<double>())] = item.at(1).get<double>();
            }
        }
    }
    return activity;
}

}  // namespace detail

/**
 * @brief Writes a fitted window as the versioned model container.
 *
 * Coefficients are stored as sparse (column, value) pairs against the
 * deterministic column enumeration; residual matrices keep their day
 * alignment. Output is byte-stable for identical fits.
 */
inline void save_window_fit(const WindowFit& fit, const PanelDataset& panel, std::ostream& out) {
    const PriceGrid& grid = panel.grid();
    json root;
    root["format"] = "xmodel-models";
    root["version"] = 1;
    root["window_begin"] = panel.date(fit.window_begin).to_string();
    root["window_end"] = panel.date(fit.window_end - 1).to_string();
    root["v_star"] = fit.supply_partition.v_star();
    root["partition"] = {{"supply", detail::partition_to_json(fit.supply_partition, grid)},
                         {"demand", detail::partition_to_json(fit.demand_partition, grid)}};
    root["mean_surface"] = {{"supply", detail::surface_to_json(fit.supply_mean, grid)},
                            {"demand", detail::surface_to_json(fit.demand_mean, grid)}};
    root["activity"] = detail::activity_to_json(fit.activity, grid);

    json models = json::array();
    for (const auto& per_hour : fit.models) {
        for (const auto& m : per_hour) {
            json jm;
            jm["process"] = m.process;
            jm["hour"] = m.hour;
            jm["lambda"] = m.lambda;
            jm["bic"] = m.bic;
            jm["df"] = m.df;
            jm["sigma2"] = m.sigma2;
            jm["mu"] = m.mu;
            jm["y_scale"] = m.y_scale;
            json coef = json::array();
            for (const auto& [col, value] : m.coef) coef.push_back(json::array({col, value}));
            jm["coef"] = std::move(coef);
            jm["dropped"] = m.dropped_columns;
            jm["residuals"] = m.residuals;
            models.push_back(std::move(jm));
        }
    }
    root["models"] = std::move(models);
    json days = json::array();
    for (std::size_t d : fit.models.front().front().residual_days) {
        days.push_back(panel.date(d).to_string());
    }
    root["residual_days"] = std::move(days);
    out << root.dump(1, '\t') << '\n';
}

inline void save_window_fit(const WindowFit& fit, const PanelDataset& panel,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write model container: " + path);
    save_window_fit(fit, panel, out);
}

/**
 * @brief Restores a fitted window against the same panel.
 *
 * The centered panel (lag values and means) is rebuilt from the panel and
 * the stored partition, which is cheaper than persisting it and keeps the
 * container focused on estimated quantities.
 */
inline WindowFit load_window_fit(const PanelDataset& panel, std::istream& in) {
    json root = json::parse(in);
    if (root.at("format") != "xmodel-models" || root.at("version") != 1) {
        throw ParseError("not an xmodel-models v1 container", 1);
    }
    const PriceGrid& grid = panel.grid();
    const auto begin_idx = panel.day_index_of(Date::parse(root.at("window_begin")));
    const auto end_idx = panel.day_index_of(Date::parse(root.at("window_end")));
    if (!begin_idx || !end_idx) {
        throw ValidationError("model container window does not match the panel");
    }
    const std::size_t w_begin = *begin_idx;
    const std::size_t w_end = *end_idx + 1;
    const double v_star = root.at("v_star").get<double>();

    ClassPartition s_part(Side::Supply, detail::bounds_from_json(root.at("partition").at("supply"), grid),
                          v_star, grid);
    ClassPartition d_part(Side::Demand, detail::bounds_from_json(root.at("partition").at("demand"), grid),
                          v_star, grid);
    FeatureSpace space;
    space.m_s = static_cast<int>(s_part.n_classes());
    space.m_d = static_cast<int>(d_part.n_classes());
    const ClassVolumeSeries volumes = class_volumes(panel, s_part, d_part);

    WindowFit fit{space,
                  std::move(s_part),
                  std::move(d_part),
                  detail::surface_from_json(root.at("mean_surface").at("supply"), Side::Supply, grid),
                  detail::surface_from_json(root.at("mean_surface").at("demand"), Side::Demand, grid),
                  detail::activity_from_json(root.at("activity"), grid),
                  CenteredPanel(panel, volumes, space, w_begin, w_end),
                  {},
                  w_begin,
                  w_end};

    std::vector<std::size_t> residual_days;
    for (const auto& item : root.at("residual_days")) {
        const auto idx = panel.day_index_of(Date::parse(item.get<std::string>()));
        if (!idx) throw ValidationError("residual day missing from panel");
        residual_days.push_back(*idx);
    }
    fit.models.resize(static_cast<std::size_t>(space.n_classes()));
    for (const auto& jm : root.at("models")) {
        FittedClassModel m;
        m.process = jm.at("process").get<int>();
        m.hour = jm.at("hour").get<int>();
        m.lambda = jm.at("lambda").get<double>();
        m.bic = jm.at("bic").get<double>();
        m.df = jm.at("df").get<int>();
        m.sigma2 = jm.at("sigma2").get<double>();
        m.mu = jm.at("mu").get<double>();
        m.y_scale = jm.at("y_scale").get<double>();
        for (const auto& c : jm.at("coef")) {
            m.coef.emplace_back(c.at(0).get<std::uint32_t>(), c.at(1).get<double>());
        }
        m.dropped_columns = jm.at("dropped").get<std::vector<std::uint32_t>>();
        m.residuals = jm.at("residuals").get<std::vector<double>>();
        m.residual_days = residual_days;
        fit.models.at(static_cast<std::size_t>(m.process))[static_cast<std::size_t>(m.hour)] =
            std::move(m);
    }
    return fit;
}

inline WindowFit load_window_fit(const PanelDataset& panel, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model container: " + path);
    return load_window_fit(panel, in);
}

/// Fit report: selected penalty, sparsity and BIC per (class, hour).
inline void export_fit_report(const WindowFit& fit, std::ostream& out) {
    out << "process,hour,lambda,df,bic\n";
    for (const auto& per_hour : fit.models) {
        for (const auto& m : per_hour) {
            out << m.process << ',' << m.hour << ',' << format_double(m.lambda) << ',' << m.df
                << ',' << format_double(m.bic) << '\n';
        }
    }
}

/// `date,hour,point_price,point_volume,q...` rows, one per hour.
inline void export_forecast_report(const DayForecast& day, const PanelDataset& panel,
                                   bool volumes, std::ostream& out) {
    const std::vector<double> levels = report_quantile_levels();
    out << "date,hour,point_price,point_volume";
    for (double level : levels) out << ",q" << format_double(level);
    out << '\n';
    const std::string date = panel.date(day.target_day).to_string();
    for (int h = 0; h < 24; ++h) {
        const Intersection& clearing = day.point_auctions[h].clearing;
        out << date << ',' << h << ',' << format_double(clearing.price) << ','
            << format_double(clearing.volume);
        if (day.hours[h]) {
            const auto& q = volumes ? day.hours[h]->volume_quantiles : day.hours[h]->price_quantiles;
            for (double v : q) out << ',' << format_double(v);
        }
        out << '\n';
    }
}

/**
 * @brief Per-price quantile bands of the reconstructed curves.
 *
 * Re-runs the per-draw reconstructions (identical substreams, so the draws
 * match the forecast exactly) and records, for each mean-support price, the
 * point cumulative volume and the draw quantiles at the requested levels.
 */
inline void export_curve_forecast(const PanelDataset& panel, const WindowFit& fit,
                                  const DayForecast& day, const PipelineSettings& settings,
                                  const std::vector<double>& levels, std::ostream& out) {
    const ReconstructionContext ctx = fit.context(panel.grid());
    out << "hour,side,price,point_volume";
    for (double level : levels) out << ",q" << format_double(level);
    out << '\n';

    const int m_s = fit.space.m_s;
    const int m_d = fit.space.m_d;
    for (int h = 0; h < 24; ++h) {
        for (Side side : {Side::Supply, Side::Demand}) {
            const MeanSurface& mean = side == Side::Supply ? fit.supply_mean : fit.demand_mean;
            std::vector<Tick> ticks;
            for (const auto& [tick, v] : mean.values) ticks.push_back(tick);
            const std::size_t B = day.sample.draws.size();
            // cumulative volume at each support price, per draw
            std::vector<std::vector<double>> cum(ticks.size());
            for (auto& c : cum) c.reserve(B);
            for (std::size_t b = 0; b < B; ++b) {
                std::mt19937_64 rng =
                    substream(settings.seed, 0x7265636eULL + static_cast<std::uint64_t>(h), b);
                try {
                    const ReconstructedAuction rec = reconstruct_draw(
                        ctx, h, detail::side_slice(day.sample.draws[b], 0, m_s, h),
                        detail::side_slice(day.sample.draws[b], m_s, m_d, h), rng);
                    const VolumeSurface& surf = side == Side::Supply ? rec.supply : rec.demand;
                    double total = 0.0;
                    if (side == Side::Supply) {
                        std::size_t ti = 0;
                        for (const auto& [tick, v] : surf.entries()) {
                            while (ti < ticks.size() && ticks[ti] < tick) {
                                cum[ti].push_back(total);
                                ++ti;
                            }
                            total += v;
                            if (ti < ticks.size() && ticks[ti] == tick) {
                                cum[ti].push_back(total);
                                ++ti;
                            }
                        }
                        while (ti < ticks.size()) cum[ti++].push_back(total);
                    } else {
                        std::size_t ti = ticks.size();
                        const auto& entries = surf.entries();
                        for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
                            while (ti > 0 && ticks[ti - 1] > it->first) {
                                cum[ti - 1].push_back(total);
                                --ti;
                            }
                            total += it->second;
                            if (ti > 0 && ticks[ti - 1] == it->first) {
                                cum[ti - 1].push_back(total);
                                --ti;
                            }
                        }
                        while (ti > 0) cum[--ti].push_back(total);
                    }
                } catch (const NoCrossingError&) {
                    // excluded draw; bands use the surviving draws
                }
            }
            // point reconstruction cumulative volumes
            const VolumeSurface& point_surf =
                side == Side::Supply ? day.point_auctions[h].supply : day.point_auctions[h].demand;
            std::vector<double> point_cum(ticks.size(), 0.0);
            {
                double total = 0.0;
                if (side == Side::Supply) {
                    std::size_t ti = 0;
                    for (const auto& [tick, v] : point_surf.entries()) {
                        while (ti < ticks.size() && ticks[ti] < tick) point_cum[ti++] = total;
                        total += v;
                        if (ti < ticks.size() && ticks[ti] == tick) point_cum[ti++] = total;
                    }
                    while (ti < ticks.size()) point_cum[ti++] = total;
                } else {
                    std::size_t ti = ticks.size();
                    const auto& entries = point_surf.entries();
                    for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
                        while (ti > 0 && ticks[ti - 1] > it->first) point_cum[--ti] = total;
                        total += it->second;
                        if (ti > 0 && ticks[ti - 1] == it->first) point_cum[--ti] = total;
                    }
                    while (ti > 0) point_cum[--ti] = total;
                }
            }
            for (std::size_t ti = 0; ti < ticks.size(); ++ti) {
                out << h << ',' << side_code(side) << ','
                    << format_double(panel.grid().price_at(ticks[ti])) << ','
                    << format_double(point_cum[ti]);
                std::sort(cum[ti].begin(), cum[ti].end());
                for (double level : levels) {
                    out << ','
                        << format_double(cum[ti].empty() ? point_cum[ti]
                                                         : quantile_sorted(cum[ti], level));
                }
                out << '\n';
            }
        }
    }
}

}  // namespace xmodel
