#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xmodel/benchmarks/models.hpp"
#include "xmodel/pipeline.hpp"
#include "xmodel/text.hpp"

namespace xmodel {

/// One model's forecasts for one target day of the study.
struct DayOutcome {
    bool ok = false;
    std::string error;
    std::array<double, 24> point{};
    // quantiles[level][hour]; empty when the model has no density forecast
    std::vector<std::array<double, 24>> quantiles;
};

/// Raw per-day study records, the substrate for scores and coverage.
struct StudyRecords {
    std::vector<std::size_t> targets;  // panel day index per study day
    std::vector<char> excluded;        // DST-transition targets, excluded from scores
    std::vector<std::array<double, 24>> realized;
    std::vector<double> levels;  // quantile levels shared by all models
    std::map<std::string, std::vector<DayOutcome>> outcomes;
};

/// Score-table row matching the paper-style export.
struct ScoreRow {
    std::string model;
    double mae = 0.0, mae_sd = 0.0, mae_pct = 0.0;
    double rmse = 0.0, rmse_sd = 0.0, rmse_pct = 0.0;
    std::array<double, 24> mae_h{}, rmse_h{};
    std::size_t days = 0;
    std::size_t failed_days = 0;
};

struct ScoreTable {
    std::vector<ScoreRow> rows;

    const ScoreRow* find(const std::string& model) const {
        for (const auto& r : rows)
            if (r.model == model) return &r;
        return nullptr;
    }
};

/**
 * @brief Observed-to-theoretical frequency per 1% quantile bin.
 *
 * Bin k collects realizations between the k% and (k+1)% forecast quantiles
 * (open ends at the extremes), so each bin expects 1% of the mass and the
 * ratios average to exactly one.
 */
struct CoverageReport {
    std::array<double, 100> ratio{};
    std::size_t observations = 0;
    std::size_t rearranged = 0;   // non-monotone quantile vectors fixed before binning
    double central90 = 0.0;       // share of realizations inside [q05, q95]
};

/**
 * @brief Bins realized values against per-observation quantile vectors.
 *
 * `levels` must contain the interior percent grid 0.01..0.99. Non-monotone
 * quantile vectors are sorted (and counted) before binning, as quantile
 * crossings occasionally happen for mixture densities.
 */
inline CoverageReport coverage(const std::vector<double>& realized,
                               const std::vector<std::vector<double>>& quantiles,
                               const std::vector<double>& levels) {
    if (realized.size() != quantiles.size()) {
        throw ConfigError("coverage: realized and quantile forecast counts differ");
    }
    std::vector<std::size_t> percent_index(99);
    for (int k = 1; k <= 99; ++k) {
        const double target = k / 100.0;
        auto it = std::find_if(levels.begin(), levels.end(),
                               [&](double l) { return std::abs(l - target) < 1e-12; });
        if (it == levels.end()) throw ConfigError("coverage requires quantiles at 1% spacing");
        percent_index[static_cast<std::size_t>(k - 1)] =
            static_cast<std::size_t>(it - levels.begin());
    }
    const auto level_at = [&](const std::vector<double>& q, int k) {
        return q[percent_index[static_cast<std::size_t>(k - 1)]];
    };

    CoverageReport report;
    std::array<std::size_t, 100> counts{};
    std::size_t inside90 = 0;
    for (std::size_t i = 0; i < realized.size(); ++i) {
        std::vector<double> q = quantiles[i];
        if (!std::is_sorted(q.begin(), q.end())) {
            std::sort(q.begin(), q.end());
            ++report.rearranged;
        }
        const double x = realized[i];
        // first percent level with quantile >= x gives the bin
        int bin = 99;
        for (int k = 1; k <= 99; ++k) {
            if (x <= level_at(q, k)) {
                bin = k - 1;
                break;
            }
        }
        counts[static_cast<std::size_t>(bin)] += 1;
        if (x >= level_at(q, 5) && x <= level_at(q, 95)) ++inside90;
    }
    report.observations = realized.size();
    for (int k = 0; k < 100; ++k) {
        report.ratio[static_cast<std::size_t>(k)] =
            realized.empty() ? 0.0
                             : static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                                   (0.01 * static_cast<double>(realized.size()));
    }
    report.central90 =
        realized.empty() ? 0.0 : static_cast<double>(inside90) / static_cast<double>(realized.size());
    return report;
}

/// Study driver configuration.
struct StudyConfig {
    PipelineSettings pipeline;
    bool run_xmodel = true;
    std::vector<const bench::BenchmarkModel*> benchmarks;
    std::size_t oos_begin = 0;  // first target day index
    std::size_t oos_end = 0;    // one past the last target day
    bool quantiles_for_benchmarks = true;
    std::ostream* warnings = &std::cerr;
};

namespace detail {

inline std::vector<std::array<double, 24>> benchmark_quantiles(
    const bench::BenchmarkForecast& forecast, const std::vector<double>& levels) {
    std::vector<std::array<double, 24>> q(levels.size());
    for (std::size_t li = 0; li < levels.size(); ++li) {
        for (int h = 0; h < 24; ++h) {
            q[li][h] = forecast.density[h].quantile(levels[li]);
        }
    }
    return q;
}

}  // namespace detail

/**
 * @brief Rolling out-of-sample study with daily re-estimation.
 *
 * For each target day in [oos_begin, oos_end) every model is re-fitted on
 * the trailing window and forecasts all 24 hours. Failures are recorded and
 * the day is excluded from that model's scores with a warning, never
 * imputed. DST-transition targets are excluded from everyone's scores.
 */
inline StudyRecords rolling_study(const PanelDataset& panel, const StudyConfig& config) {
    if (config.oos_begin < config.pipeline.window_days) {
        throw InsufficientHistoryError("out-of-sample range starts before one full window");
    }
    if (config.oos_end > panel.n_days() || config.oos_begin >= config.oos_end) {
        throw ConfigError("invalid out-of-sample range");
    }
    StudyRecords records;
    records.levels = report_quantile_levels();

    std::vector<std::string> model_ids;
    if (config.run_xmodel) model_ids.push_back("x-model");
    for (const auto* b : config.benchmarks) model_ids.push_back(b->id());
    for (const auto& id : model_ids) {
        records.outcomes[id] = {};
    }

    for (std::size_t target = config.oos_begin; target < config.oos_end; ++target) {
        records.targets.push_back(target);
        const auto& dst = panel.dst_normalized_days();
        records.excluded.push_back(
            std::find(dst.begin(), dst.end(), target) != dst.end() ? 1 : 0);
        std::array<double, 24> realized{};
        for (int h = 0; h < 24; ++h) realized[h] = panel.exog(Exog::Price, target, h);
        records.realized.push_back(realized);

        const std::size_t w_begin = target - config.pipeline.window_days;
        if (config.run_xmodel) {
            DayOutcome outcome;
            try {
                const WindowFit fit = fit_window(panel, w_begin, target, config.pipeline);
                const DayForecast day = forecast_day(panel, fit, config.pipeline);
                outcome.ok = true;
                for (int h = 0; h < 24; ++h) {
                    outcome.point[h] = day.point_auctions[h].clearing.price;
                }
                if (config.pipeline.bootstrap_draws >= 1) {
                    outcome.quantiles.resize(records.levels.size());
                    for (std::size_t li = 0; li < records.levels.size(); ++li) {
                        for (int h = 0; h < 24; ++h) {
                            outcome.quantiles[li][h] = day.hours[h]->price_quantiles[li];
                        }
                    }
                }
            } catch (const Error& e) {
                outcome.ok = false;
                outcome.error = e.what();
                if (config.warnings) {
                    *config.warnings << "warning: x-model failed on "
                                     << panel.date(target).to_string() << ": " << e.what()
                                     << "\n";
                }
            }
            records.outcomes["x-model"].push_back(std::move(outcome));
        }
        for (const auto* bm : config.benchmarks) {
            DayOutcome outcome;
            try {
                const bench::BenchmarkForecast f = bm->forecast(panel, w_begin, target);
                outcome.ok = true;
                outcome.point = f.point;
                if (config.quantiles_for_benchmarks) {
                    outcome.quantiles = detail::benchmark_quantiles(f, records.levels);
                }
            } catch (const Error& e) {
                outcome.ok = false;
                outcome.error = e.what();
                if (config.warnings) {
                    *config.warnings << "warning: " << bm->id() << " failed on "
                                     << panel.date(target).to_string() << ": " << e.what()
                                     << "\n";
                }
            }
            records.outcomes[bm->id()].push_back(std::move(outcome));
        }
    }
    return records;
}

/**
 * @brief MAE/RMSE table from study records.
 *
 * Standard deviations are standard errors of the per-observation error
 * statistics: sd(|e|)/sqrt(N) for the MAE and sd(e^2)/(2 RMSE sqrt(N)) for
 * the RMSE (zero when the RMSE itself is zero), which makes a perfect
 * model's dispersion exactly zero. Ratios are against the persistent row.
 */
inline ScoreTable score_table(const StudyRecords& records) {
    ScoreTable table;
    for (const auto& [model, outcomes] : records.outcomes) {
        ScoreRow row;
        row.model = model;
        std::vector<double> abs_errors, sq_errors;
        std::array<std::vector<double>, 24> abs_h, sq_h;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (records.excluded[i]) continue;
            if (!outcomes[i].ok) {
                ++row.failed_days;
                continue;
            }
            ++row.days;
            for (int h = 0; h < 24; ++h) {
                const double e = records.realized[i][h] - outcomes[i].point[h];
                abs_errors.push_back(std::abs(e));
                sq_errors.push_back(e * e);
                abs_h[h].push_back(std::abs(e));
                sq_h[h].push_back(e * e);
            }
        }
        const auto mean_of = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        };
        const auto sd_of = [&](const std::vector<double>& v) {
            const double m = mean_of(v);
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
        };
        row.mae = mean_of(abs_errors);
        row.rmse = std::sqrt(mean_of(sq_errors));
        const double n = static_cast<double>(abs_errors.size());
        if (n > 0) {
            row.mae_sd = sd_of(abs_errors) / std::sqrt(n);
            row.rmse_sd = row.rmse > 0.0 ? sd_of(sq_errors) / (2.0 * row.rmse * std::sqrt(n)) : 0.0;
        }
        for (int h = 0; h < 24; ++h) {
            row.mae_h[h] = mean_of(abs_h[h]);
            row.rmse_h[h] = std::sqrt(mean_of(sq_h[h]));
        }
        table.rows.push_back(std::move(row));
    }
    if (const ScoreRow* persistent = table.find("persistent")) {
        const double mae0 = persistent->mae, rmse0 = persistent->rmse;
        for (auto& row : table.rows) {
            row.mae_pct = mae0 > 0.0 ? 100.0 * row.mae / mae0 : 0.0;
            row.rmse_pct = rmse0 > 0.0 ? 100.0 * row.rmse / rmse0 : 0.0;
        }
    }
    return table;
}

/// Coverage of one model's quantile forecasts over all scored observations.
inline CoverageReport coverage_of(const StudyRecords& records, const std::string& model) {
    const auto it = records.outcomes.find(model);
    if (it == records.outcomes.end()) throw ConfigError("unknown model: " + model);
    std::vector<double> realized;
    std::vector<std::vector<double>> quantiles;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
        const DayOutcome& o = it->second[i];
        if (records.excluded[i] || !o.ok || o.quantiles.empty()) continue;
        for (int h = 0; h < 24; ++h) {
            realized.push_back(records.realized[i][h]);
            std::vector<double> q(o.quantiles.size());
            for (std::size_t li = 0; li < q.size(); ++li) q[li] = o.quantiles[li][h];
            quantiles.push_back(std::move(q));
        }
    }
    return coverage(realized, quantiles, records.levels);
}

/// Writes the paper-style score table.
inline void export_score_table(const ScoreTable& table, std::ostream& out) {
    out << "model,mae,mae_sd,mae_pct_persistent,rmse,rmse_sd,rmse_pct_persistent,days,failed_days\n";
    for (const auto& row : table.rows) {
        out << row.model << ',' << format_double(row.mae) << ',' << format_double(row.mae_sd)
            << ',' << format_double(row.mae_pct) << ',' << format_double(row.rmse) << ','
            << format_double(row.rmse_sd) << ',' << format_double(row.rmse_pct) << ',' << row.days
            << ',' << row.failed_days << '\n';
    }
}

inline void export_hourly_scores(const ScoreTable& table, std::ostream& out) {
    out << "model,hour,mae,rmse\n";
    for (const auto& row : table.rows) {
        for (int h = 0; h < 24; ++h) {
            out << row.model << ',' << h << ',' << format_double(row.mae_h[h]) << ','
                << format_double(row.rmse_h[h]) << '\n';
        }
    }
}

/// Writes `bin,ratio` rows; bins are the 1%-wide quantile intervals.
inline void export_coverage(const CoverageReport& report, std::ostream& out) {
    out << "bin,ratio\n";
    for (int k = 0; k < 100; ++k) {
        out << "q" << (k < 10 ? "0" : "") << k << ','
            << format_double(report.ratio[static_cast<std::size_t>(k)]) << '\n';
    }
}

}  // namespace xmodel
