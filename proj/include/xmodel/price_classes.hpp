#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <vector>

#include "xmodel/curve.hpp"
#include "xmodel/errors.hpp"
#include "xmodel/panel.hpp"
#include "xmodel/text.hpp"

namespace xmodel {

/**
 * @brief Mean bid volume per price over an estimation window, one side.
 *
 * Entries exist exactly for the prices bid at least once in the window; the
 * stored value is the all-auction average (zeros included in the mean).
 */
struct MeanSurface {
    Side side = Side::Supply;
    std::map<Tick, double> values;
};

/**
 * @brief Averages bid volumes over every auction of a day range.
 *
 * The observation count is the number of (day, hour) auctions in
 * [day_begin, day_end), across all hours.
 */
inline std::pair<MeanSurface, MeanSurface> mean_surfaces(const PanelDataset& panel,
                                                         std::size_t day_begin,
                                                         std::size_t day_end) {
    if (day_begin >= day_end || day_end > panel.n_days()) {
        throw EmptyPanelError("mean_surfaces: empty or invalid day range");
    }
    MeanSurface supply{Side::Supply, {}};
    MeanSurface demand{Side::Demand, {}};
    const double T = static_cast<double>((day_end - day_begin) * 24);
    for (std::size_t d = day_begin; d < day_end; ++d) {
        for (int h = 0; h < 24; ++h) {
            for (const auto& [tick, v] : panel.cell(d, h).supply.entries()) {
                supply.values[tick] += v;
            }
            for (const auto& [tick, v] : panel.cell(d, h).demand.entries()) {
                demand.values[tick] += v;
            }
        }
    }
    for (auto& [tick, v] : supply.values) v /= T;
    for (auto& [tick, v] : demand.values) v /= T;
    return {std::move(supply), std::move(demand)};
}

inline std::pair<MeanSurface, MeanSurface> mean_surfaces(const PanelDataset& panel) {
    return mean_surfaces(panel, 0, panel.n_days());
}

/// Accumulates a mean surface into the mean sale or purchase curve.
inline PriceCurve mean_curve(const MeanSurface& mean, const PriceGrid& grid) {
    if (mean.values.empty()) throw EmptyCurveError("cannot aggregate an empty mean surface");
    PriceCurve curve;
    curve.side = mean.side;
    curve.points.reserve(mean.values.size());
    double cum = 0.0;
    if (mean.side == Side::Supply) {
        for (const auto& [tick, v] : mean.values) {
            cum += v;
            curve.points.push_back({cum, grid.price_at(tick)});
        }
    } else {
        for (auto it = mean.values.rbegin(); it != mean.values.rend(); ++it) {
            cum += it->second;
            curve.points.push_back({cum, grid.price_at(it->first)});
        }
    }
    return curve;
}

/**
 * @brief Price-class bounds for one side plus the class volume target.
 *
 * Bounds are stored in aggregation order: ascending for supply (each class
 * is the half-open interval up to and including its bound), descending for
 * demand (each class starts at its bound). The extreme grid prices are
 * always bounds, so the must-run classes {p_min} on supply and {p_max} on
 * demand stand alone and the class intervals partition the whole grid.
 */
class ClassPartition {
public:
    ClassPartition(Side side, std::vector<Tick> bounds, double v_star, const PriceGrid& grid)
        : side_(side), bounds_(std::move(bounds)), v_star_(v_star), grid_(grid) {}

    Side side() const { return side_; }
    double v_star() const { return v_star_; }
    std::size_t n_classes() const { return bounds_.size(); }
    const std::vector<Tick>& bounds() const { return bounds_; }
    Tick bound_tick(std::size_t c) const { return bounds_.at(c); }
    double bound_price(std::size_t c) const { return grid_.price_at(bounds_.at(c)); }

    /// Index of the class containing a grid tick.
    std::size_t class_of(Tick t) const {
        if (side_ == Side::Supply) {
            // bounds ascending; class c covers (bounds[c-1], bounds[c]]
            auto it = std::lower_bound(bounds_.begin(), bounds_.end(), t);
            return static_cast<std::size_t>(it - bounds_.begin());
        }
        // bounds descending; class c covers [bounds[c], bounds[c-1])
        auto it = std::lower_bound(bounds_.begin(), bounds_.end(), t,
                                   [](Tick bound, Tick value) { return bound > value; });
        return static_cast<std::size_t>(it - bounds_.begin());
    }

    /// Tick range [first, last] of class c on the full grid.
    std::pair<Tick, Tick> class_range(std::size_t c) const {
        if (side_ == Side::Supply) {
            const Tick lo = c == 0 ? 0 : bounds_[c - 1] + 1;
            return {lo, bounds_[c]};
        }
        const Tick hi = c == 0 ? grid_.size() - 1 : bounds_[c - 1] - 1;
        return {bounds_[c], hi};
    }

private:
    Side side_;
    std::vector<Tick> bounds_;
    double v_star_;
    PriceGrid grid_;
};

/**
 * @brief Inverts the mean curve on the equidistant volume grid {i V_*}.
 *
 * Each inverse point is snapped to the next actual bid price in the
 * accumulation direction, so bounds are always realizable bid prices. The
 * extreme grid prices close the partition; the last class absorbs whatever
 * volume remains below V_*.
 */
inline ClassPartition build_partition(const PriceCurve& mean, double v_star,
                                      const PriceGrid& grid) {
    if (mean.empty()) throw EmptyCurveError("cannot partition an empty mean curve");
    if (!(v_star > 0.0)) throw PartitionError("V_star must be positive");
    const double total = mean.points.back().volume;
    if (v_star >= total) {
        throw PartitionError("V_star exceeds the total mean volume of the curve");
    }

    std::vector<Tick> bounds;
    const Tick first_tick = mean.side == Side::Supply ? 0 : grid.size() - 1;
    const Tick last_tick = mean.side == Side::Supply ? grid.size() - 1 : 0;
    bounds.push_back(first_tick);

    const double tol = 1e-9 * std::max(1.0, total);
    std::size_t i = 1;
    for (const CurvePoint& pt : mean.points) {
        const Tick tick = grid.index_of(pt.price);
        bool added = (tick == bounds.back());
        while (i * v_star < total - tol && i * v_star <= pt.volume + tol) {
            if (!added) {
                bounds.push_back(tick);
                added = true;
            }
            ++i;
        }
    }
    if (bounds.back() != last_tick) bounds.push_back(last_tick);
    return ClassPartition(mean.side, std::move(bounds), v_star, grid);
}

/**
 * @brief Bid volume aggregated to price classes, per (side, class, day, hour).
 */
struct ClassVolumeSeries {
    // [class][day][hour]
    std::vector<std::vector<std::array<double, 24>>> supply;
    std::vector<std::vector<std::array<double, 24>>> demand;

    const std::vector<std::vector<std::array<double, 24>>>& of(Side s) const {
        return s == Side::Supply ? supply : demand;
    }
};

inline ClassVolumeSeries class_volumes(const PanelDataset& panel, const ClassPartition& supply,
                                       const ClassPartition& demand) {
    ClassVolumeSeries out;
    const std::size_t D = panel.n_days();
    out.supply.assign(supply.n_classes(), std::vector<std::array<double, 24>>(D));
    out.demand.assign(demand.n_classes(), std::vector<std::array<double, 24>>(D));
    for (auto& per_class : out.supply)
        for (auto& day : per_class) day.fill(0.0);
    for (auto& per_class : out.demand)
        for (auto& day : per_class) day.fill(0.0);
    for (std::size_t d = 0; d < D; ++d) {
        for (int h = 0; h < 24; ++h) {
            for (const auto& [tick, v] : panel.cell(d, h).supply.entries()) {
                out.supply[supply.class_of(tick)][d][h] += v;
            }
            for (const auto& [tick, v] : panel.cell(d, h).demand.entries()) {
                out.demand[demand.class_of(tick)][d][h] += v;
            }
        }
    }
    return out;
}

/// Writes `side,index,bound` rows for inspection and golden tests.
inline void export_partition_csv(const ClassPartition& supply, const ClassPartition& demand,
                                 std::ostream& out) {
    out << "side,index,bound\n";
    for (std::size_t c = 0; c < supply.n_classes(); ++c) {
        out << "S," << c << ',' << format_double(supply.bound_price(c)) << '\n';
    }
    for (std::size_t c = 0; c < demand.n_classes(); ++c) {
        out << "D," << c << ',' << format_double(demand.bound_price(c)) << '\n';
    }
}

}  // namespace xmodel
