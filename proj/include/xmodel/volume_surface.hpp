#pragma once

#include <map>
#include <utility>

#include "xmodel/errors.hpp"
#include "xmodel/prices.hpp"

namespace xmodel {

/**
 * @brief Bid volumes of one market side for a single auction.
 *
 * Only prices that actually carry volume are stored; the bid-price set is
 * exactly the key set. Volumes are strictly positive by construction.
 */
class VolumeSurface {
public:
    using Map = std::map<Tick, double>;

    explicit VolumeSurface(Side side) : side_(side) {}

    Side side() const { return side_; }
    const Map& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    /// Adds volume at a grid tick; volumes at the same price accumulate.
    void add(Tick tick, double volume) {
        if (!(volume > 0.0)) throw ValidationError("bid volume must be positive");
        entries_[tick] += volume;
    }

    double volume_at(Tick tick) const {
        auto it = entries_.find(tick);
        return it == entries_.end() ? 0.0 : it->second;
    }

    double total_volume() const {
        double sum = 0.0;
        for (const auto& [tick, v] : entries_) sum += v;
        return sum;
    }

private:
    Side side_;
    Map entries_;
};

}  // namespace xmodel
