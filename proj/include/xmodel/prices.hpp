#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "xmodel/errors.hpp"

namespace xmodel {

enum class Side { Supply, Demand };

inline char side_code(Side s) { return s == Side::Supply ? 'S' : 'D'; }

inline Side side_from_code(char c) {
    if (c == 'S') return Side::Supply;
    if (c == 'D') return Side::Demand;
    throw ValidationError(std::string("invalid side code: '") + c + "'");
}

/// Index of a price on a PriceGrid. Prices are handled as integer tick
/// offsets internally so that 0.1-step grid arithmetic is exact.
using Tick = std::int32_t;

/**
 * @brief The discrete set of admissible bid prices.
 *
 * The default grid covers -500.0 to 3000.0 in steps of 0.1, i.e. 35001
 * distinct prices.
 */
class PriceGrid {
public:
    PriceGrid(double p_min, double p_max, double tick) : p_min_(p_min), p_max_(p_max), tick_(tick) {
        if (!(p_min < p_max)) throw ConfigError("price grid requires p_min < p_max");
        if (!(tick > 0)) throw ConfigError("price grid requires tick > 0");
        const double steps = (p_max - p_min) / tick;
        const double rounded = std::round(steps);
        if (std::abs(steps - rounded) > 1e-6) {
            throw ConfigError("price grid span is not an integer number of ticks");
        }
        size_ = static_cast<Tick>(rounded) + 1;
    }

    static PriceGrid epex() { return PriceGrid(-500.0, 3000.0, 0.1); }

    double p_min() const { return p_min_; }
    double p_max() const { return p_max_; }
    double tick() const { return tick_; }
    Tick size() const { return size_; }

    double price_at(Tick index) const { return p_min_ + index * tick_; }

    bool contains(double price) const {
        if (price < p_min_ - 0.5 * tick_ || price > p_max_ + 0.5 * tick_) return false;
        const double steps = (price - p_min_) / tick_;
        return std::abs(steps - std::round(steps)) < 1e-6;
    }

    Tick index_of(double price) const {
        if (!contains(price)) {
            throw ValidationError("price " + std::to_string(price) + " is not on the grid");
        }
        return static_cast<Tick>(std::round((price - p_min_) / tick_));
    }

    friend bool operator==(const PriceGrid& a, const PriceGrid& b) {
        return a.p_min_ == b.p_min_ && a.p_max_ == b.p_max_ && a.tick_ == b.tick_;
    }

private:
    double p_min_;
    double p_max_;
    double tick_;
    Tick size_;
};

/// Rounds to two decimal places, the resolution clearing prices are quoted at.
inline double round_price(double p) { return std::round(p * 100.0) / 100.0; }

}  // namespace xmodel
