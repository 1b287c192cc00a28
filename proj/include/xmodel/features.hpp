#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "xmodel/calendar.hpp"
#include "xmodel/errors.hpp"
#include "xmodel/panel.hpp"
#include "xmodel/price_classes.hpp"

namespace xmodel {

inline constexpr int kMaxLagDepth = 36;

/**
 * @brief Shape of the regressor universe for one estimation window.
 *
 * Processes are indexed 0..total()-1: first the supply classes, then the
 * demand classes, then the five exogenous processes in the order price,
 * volume, generation, wind, solar. The last three are the planned processes
 * that are known one day ahead, so their value for "process day d" is the
 * published figure for calendar day d+1.
 */
struct FeatureSpace {
    int m_s = 0;
    int m_d = 0;
    static constexpr int m_x = kExogCount;

    int total() const { return m_s + m_d + m_x; }
    int n_classes() const { return m_s + m_d; }
    bool is_planned(int l) const { return l >= n_classes() + 2; }
    Exog exog_of(int l) const { return static_cast<Exog>(l - n_classes()); }

    /**
     * Allowed lags for regressor process l at hour j in the model of
     * process m at hour h: 1..36 when both match, 1..8 when exactly one
     * matches, lag 1 only otherwise.
     */
    static int max_lag(bool same_process, bool same_hour) {
        if (same_process && same_hour) return kMaxLagDepth;
        if (same_process || same_hour) return 8;
        return 1;
    }
};

/// Identifies one regression column.
struct ColumnKey {
    enum class Kind : std::uint8_t { Lag, Weekday };
    Kind kind = Kind::Lag;
    std::int16_t l = 0;  // process index (Lag)
    std::int8_t j = 0;   // hour 0..23 (Lag)
    std::int8_t k = 0;   // lag 1.. (Lag) or weekday threshold 2..7 (Weekday)

    friend bool operator==(const ColumnKey& a, const ColumnKey& b) {
        return a.kind == b.kind && a.l == b.l && a.j == b.j && a.k == b.k;
    }
};

/**
 * @brief Deterministic column order for the model of (m, h): process-major,
 * then hour, then lag, with the six weekday dummies at the end.
 */
inline std::vector<ColumnKey> enumerate_columns(const FeatureSpace& space, int m, int h) {
    std::vector<ColumnKey> keys;
    for (int l = 0; l < space.total(); ++l) {
        for (int j = 0; j < 24; ++j) {
            const int kmax = FeatureSpace::max_lag(l == m, j == h);
            for (int k = 1; k <= kmax; ++k) {
                keys.push_back({ColumnKey::Kind::Lag, static_cast<std::int16_t>(l),
                                static_cast<std::int8_t>(j), static_cast<std::int8_t>(k)});
            }
        }
    }
    for (int k = 2; k <= 7; ++k) {
        keys.push_back({ColumnKey::Kind::Weekday, 0, 0, static_cast<std::int8_t>(k)});
    }
    return keys;
}

/**
 * @brief Demeaned process values over one estimation window.
 *
 * Holds Y[m][d][h] = X[m][d][h] - mu[m][h] for window days, with the planned
 * processes already shifted by one day. Sample means are recomputed per
 * window.
 */
class CenteredPanel {
public:
    /**
     * @param w_begin first panel day of the window
     * @param w_end one past the last window day; this is also the forecast
     *        target day, whose planned data must exist in the panel
     */
    CenteredPanel(const PanelDataset& panel, const ClassVolumeSeries& volumes,
                  const FeatureSpace& space, std::size_t w_begin, std::size_t w_end)
        : panel_(&panel), space_(space), w_begin_(w_begin), w_end_(w_end) {
        if (w_begin >= w_end || w_end > panel.n_days()) {
            throw InsufficientHistoryError("invalid estimation window");
        }
        for (int l = space.n_classes(); l < space.total(); ++l) {
            const Exog e = space.exog_of(l);
            if (!panel.has_exog(e)) {
                throw MissingExogenousError(std::string("series '") + exog_name(e) +
                                            "' required by the model is not available");
            }
        }
        // Planned processes at window day d read calendar day d+1.
        if (planned_day(w_end - 1) >= panel.n_days()) {
            throw MissingExogenousError("planned data for the forecast target day is missing");
        }
        const std::size_t len = w_end - w_begin;
        const int M = space.total();
        y_.assign(static_cast<std::size_t>(M) * len * 24, 0.0);
        mu_.assign(static_cast<std::size_t>(M) * 24, 0.0);
        for (int m = 0; m < M; ++m) {
            for (int h = 0; h < 24; ++h) {
                double sum = 0.0;
                for (std::size_t d = w_begin; d < w_end; ++d) sum += raw(volumes, m, d, h);
                const double mean = sum / static_cast<double>(len);
                mu_[mu_index(m, h)] = mean;
                for (std::size_t d = w_begin; d < w_end; ++d) {
                    y_[y_index(m, d, h)] = raw(volumes, m, d, h) - mean;
                }
            }
        }
    }

    const FeatureSpace& space() const { return space_; }
    std::size_t window_begin() const { return w_begin_; }
    std::size_t window_end() const { return w_end_; }
    std::size_t window_length() const { return w_end_ - w_begin_; }

    double value(int m, std::size_t day, int h) const { return y_[y_index(m, day, h)]; }
    double mean(int m, int h) const { return mu_[mu_index(m, h)]; }
    int weekday_of_day(std::size_t day) const { return panel_->date(day).weekday(); }

private:
    std::size_t planned_day(std::size_t d) const { return d + 1; }

    double raw(const ClassVolumeSeries& volumes, int m, std::size_t d, int h) const {
        if (m < space_.m_s) return volumes.supply[m][d][h];
        if (m < space_.n_classes()) return volumes.demand[m - space_.m_s][d][h];
        const Exog e = space_.exog_of(m);
        const std::size_t day = space_.is_planned(m) ? planned_day(d) : d;
        return panel_->exog(e, day, h);
    }

    std::size_t y_index(int m, std::size_t day, int h) const {
        return (static_cast<std::size_t>(m) * window_length() + (day - w_begin_)) * 24 +
               static_cast<std::size_t>(h);
    }
    std::size_t mu_index(int m, int h) const {
        return static_cast<std::size_t>(m) * 24 + static_cast<std::size_t>(h);
    }

    const PanelDataset* panel_;
    FeatureSpace space_;
    std::size_t w_begin_;
    std::size_t w_end_;
    std::vector<double> y_;
    std::vector<double> mu_;
};

/// Design matrix and response for one (class, hour) regression.
struct Design {
    Eigen::MatrixXd x;                    // rows x columns, unscaled
    Eigen::VectorXd y;                    // centered response
    std::vector<ColumnKey> columns;       // column order matches x
    std::vector<std::size_t> row_days;    // panel day index per row
    int target_process = 0;
    int target_hour = 0;
};

/// Fills one design row for a target day; also used for the forecast row.
inline void fill_design_row(const CenteredPanel& panel, const std::vector<ColumnKey>& columns,
                            std::size_t target_day, Eigen::MatrixXd& x, std::size_t row) {
    const int wd = panel.weekday_of_day(target_day);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const ColumnKey& key = columns[c];
        if (key.kind == ColumnKey::Kind::Weekday) {
            x(row, c) = weekday_indicator(wd, key.k);
        } else {
            x(row, c) = panel.value(key.l, target_day - key.k, key.j);
        }
    }
}

/**
 * @brief Builds the regression for process m at hour h over the window.
 *
 * One row per day with full 36-day lag coverage; the window must be at
 * least 73 days so at least 37 rows remain.
 */
inline Design build_design(const CenteredPanel& panel, int m, int h) {
    const FeatureSpace& space = panel.space();
    if (m < 0 || m >= space.n_classes()) {
        throw ConfigError("design target must be a class process");
    }
    if (panel.window_length() < static_cast<std::size_t>(kMaxLagDepth + 37)) {
        throw InsufficientHistoryError(
            "estimation window must span at least 73 days (36 lags + 37 rows)");
    }
    Design design;
    design.target_process = m;
    design.target_hour = h;
    design.columns = enumerate_columns(space, m, h);
    const std::size_t first_row_day = panel.window_begin() + kMaxLagDepth;
    const std::size_t rows = panel.window_end() - first_row_day;
    const std::size_t cols = design.columns.size();
    design.x.resize(rows, cols);
    design.y.resize(rows);
    design.row_days.resize(rows);

    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t day = first_row_day + r;
        design.row_days[r] = day;
        design.y(r) = panel.value(m, day, h);
        fill_design_row(panel, design.columns, day, design.x, r);
    }
    return design;
}

/// Standardized design: every kept column and the response have variance 1.
struct StandardizedDesign {
    Eigen::MatrixXd x;                  // scaled, constant columns removed
    Eigen::VectorXd y;                  // scaled response
    std::vector<std::size_t> kept;      // kept column index -> original column index
    std::vector<std::size_t> dropped;   // original indices of constant columns
    std::vector<double> column_scale;   // std dev of each kept column (original units)
    double y_scale = 1.0;               // std dev of the response
};

/**
 * @brief Scales columns and response to unit sample variance.
 *
 * Constant columns cannot be scaled and are removed; their original indices
 * are recorded so the fitted model can report them. A constant response
 * (possible on degenerate windows) keeps scale 1 and yields the null model.
 */
inline StandardizedDesign standardize(const Design& design) {
    const auto rows = design.x.rows();
    const auto cols = design.x.cols();
    StandardizedDesign out;

    const auto variance_of = [&](const Eigen::VectorXd& v) {
        const double mean = v.mean();
        return (v.array() - mean).square().sum() / static_cast<double>(rows);
    };

    std::vector<double> scales;
    scales.reserve(cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double var = variance_of(design.x.col(c));
        if (var > 1e-24) {
            out.kept.push_back(static_cast<std::size_t>(c));
            scales.push_back(std::sqrt(var));
        } else {
            out.dropped.push_back(static_cast<std::size_t>(c));
        }
    }
    out.column_scale = scales;
    out.x.resize(rows, static_cast<Eigen::Index>(out.kept.size()));
    for (std::size_t c = 0; c < out.kept.size(); ++c) {
        out.x.col(static_cast<Eigen::Index>(c)) =
            design.x.col(static_cast<Eigen::Index>(out.kept[c])) / scales[c];
    }
    const double y_var = variance_of(design.y);
    out.y_scale = y_var > 1e-24 ? std::sqrt(y_var) : 1.0;
    out.y = design.y / out.y_scale;
    return out;
}

}  // namespace xmodel
