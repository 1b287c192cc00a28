#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xmodel/errors.hpp"
#include "xmodel/prices.hpp"
#include "xmodel/volume_surface.hpp"

namespace xmodel {

/**
 * @brief One knot of an aggregated price curve: cumulative volume at a price.
 */
struct CurvePoint {
    double volume = 0.0;  // cumulative volume in MW
    double price = 0.0;   // EUR/MWh
};

/**
 * @brief Monotone piecewise-linear sale or purchase curve.
 *
 * Points are kept in aggregation order: ascending price for supply,
 * descending price for demand. Cumulative volume is non-decreasing either
 * way, so the curve is a function from volume to price once linearly
 * interpolated between knots.
 */
struct PriceCurve {
    Side side = Side::Supply;
    std::vector<CurvePoint> points;

    bool empty() const { return points.empty(); }
    double min_volume() const { return points.front().volume; }
    double max_volume() const { return points.back().volume; }
};

/**
 * @brief Result of intersecting a supply with a demand curve.
 *
 * The price is rounded to two decimal places, the resolution clearing
 * prices are quoted at. `degenerate` marks intersections where the curves
 * coincide over a volume interval; the minimum-volume crossing point is
 * returned in that case.
 */
struct Intersection {
    double price = 0.0;   // EUR/MWh, rounded to 2 decimals
    double volume = 0.0;  // MW
    bool degenerate = false;
};

/**
 * @brief Accumulates a bid surface into its price curve.
 *
 * Supply accumulates volumes over prices p <= P in ascending order, demand
 * over p >= P in descending order. One knot per distinct bid price.
 */
inline PriceCurve aggregate_curve(const VolumeSurface& surface, const PriceGrid& grid) {
    if (surface.empty()) throw EmptyCurveError("cannot aggregate an empty bid surface");
    PriceCurve curve;
    curve.side = surface.side();
    curve.points.reserve(surface.size());
    double cum = 0.0;
    if (surface.side() == Side::Supply) {
        for (const auto& [tick, volume] : surface.entries()) {
            cum += volume;
            curve.points.push_back({cum, grid.price_at(tick)});
        }
    } else {
        const auto& entries = surface.entries();
        for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
            cum += it->second;
            curve.points.push_back({cum, grid.price_at(it->first)});
        }
    }
    return curve;
}

/**
 * @brief Price of a curve at a given cumulative volume.
 *
 * Exact at knots, linear in volume between consecutive knots. Volumes
 * outside the curve support raise OutOfSupportError.
 */
inline double interpolate(const PriceCurve& curve, double volume) {
    if (curve.empty()) throw EmptyCurveError("cannot interpolate an empty curve");
    const auto& pts = curve.points;
    if (volume < pts.front().volume || volume > pts.back().volume) {
        throw OutOfSupportError("volume " + std::to_string(volume) + " outside curve support");
    }
    auto it = std::lower_bound(pts.begin(), pts.end(), volume,
                               [](const CurvePoint& p, double v) { return p.volume < v; });
    if (it->volume == volume) return it->price;
    const CurvePoint& hi = *it;
    const CurvePoint& lo = *(it - 1);
    if (hi.volume == lo.volume) return lo.price;
    const double w = (volume - lo.volume) / (hi.volume - lo.volume);
    return lo.price + w * (hi.price - lo.price);
}

namespace detail {

/// Union of both curves' volume knots restricted to [lo, hi], sorted, deduplicated.
inline std::vector<double> merged_volume_knots(const PriceCurve& a, const PriceCurve& b,
                                               double lo, double hi) {
    std::vector<double> knots;
    knots.reserve(a.points.size() + b.points.size() + 2);
    knots.push_back(lo);
    for (const auto& p : a.points)
        if (p.volume > lo && p.volume < hi) knots.push_back(p.volume);
    for (const auto& p : b.points)
        if (p.volume > lo && p.volume < hi) knots.push_back(p.volume);
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    return knots;
}

}  // namespace detail

/**
 * @brief Market clearing point of a supply and a demand curve.
 *
 * Merge-sweeps the union of both curves' volume knots and solves the linear
 * crossing inside the bracketing segment, O(n + m) and exact for
 * piecewise-linear curves. Coinciding stretches yield the minimum-volume
 * point with the degenerate flag set. NoCrossingError when the curves never
 * meet inside their common volume range.
 */
inline Intersection intersect(const PriceCurve& supply, const PriceCurve& demand) {
    if (supply.empty() || demand.empty()) throw EmptyCurveError("cannot intersect empty curves");
    const double lo = std::max(supply.min_volume(), demand.min_volume());
    const double hi = std::min(supply.max_volume(), demand.max_volume());
    if (lo > hi) throw NoCrossingError("curves have no common volume range");

    // gap(v) = supply price - demand price, non-decreasing in v.
    const auto gap = [&](double v) { return interpolate(supply, v) - interpolate(demand, v); };
    constexpr double kZero = 1e-9;

    const std::vector<double> knots = detail::merged_volume_knots(supply, demand, lo, hi);
    std::vector<double> gaps(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) gaps[i] = gap(knots[i]);

    if (gaps.front() > kZero) {
        throw NoCrossingError("supply already above demand at minimum common volume");
    }
    if (gaps.back() < -kZero) {
        throw NoCrossingError("supply below demand over the whole common volume range");
    }

    std::size_t k = 0;
    while (gaps[k] < -kZero) ++k;  // first knot with gap >= 0 (exists by the checks above)

    double v_star = 0.0;
    bool degenerate = false;
    if (gaps[k] <= kZero) {
        // Exact touch at a knot; coincidence over the following segment(s)
        // makes the intersection non-unique.
        v_star = knots[k];
        degenerate = (k + 1 < knots.size() && std::abs(gaps[k + 1]) <= kZero);
    } else {
        // Strict sign change inside (knots[k-1], knots[k]); both curves are
        // linear there, so the gap is linear too.
        const double v0 = knots[k - 1], v1 = knots[k];
        const double g0 = gaps[k - 1], g1 = gaps[k];
        v_star = v0 + (v1 - v0) * (-g0 / (g1 - g0));
    }

    const double price_raw = 0.5 * (interpolate(supply, v_star) + interpolate(demand, v_star));
    return Intersection{round_price(price_raw), v_star, degenerate};
}

}  // namespace xmodel
