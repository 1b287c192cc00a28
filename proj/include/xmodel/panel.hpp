#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xmodel/calendar.hpp"
#include "xmodel/curve.hpp"
#include "xmodel/errors.hpp"
#include "xmodel/prices.hpp"
#include "xmodel/volume_surface.hpp"

namespace xmodel {

/// One parsed bid row.
struct AuctionRecord {
    Date date;
    int hour = 0;  // 0..23 after normalization; 24 only in raw DST long days
    Side side = Side::Supply;
    double price = 0.0;
    double volume = 0.0;
};

/// The exogenous processes the model may regress on.
enum class Exog : int { Price = 0, Volume = 1, Generation = 2, Wind = 3, Solar = 4 };

inline constexpr int kExogCount = 5;

inline const char* exog_name(Exog e) {
    switch (e) {
        case Exog::Price: return "price";
        case Exog::Volume: return "volume";
        case Exog::Generation: return "generation";
        case Exog::Wind: return "wind";
        case Exog::Solar: return "solar";
    }
    return "?";
}

inline Exog exog_from_name(const std::string& name, std::size_t line = 0) {
    for (int i = 0; i < kExogCount; ++i) {
        if (name == exog_name(static_cast<Exog>(i))) return static_cast<Exog>(i);
    }
    throw ValidationError("unknown exogenous series '" + name + "'", line);
}

/// Both bid surfaces of one hourly auction.
struct HourCell {
    VolumeSurface supply{Side::Supply};
    VolumeSurface demand{Side::Demand};

    const VolumeSurface& surface(Side s) const { return s == Side::Supply ? supply : demand; }
    VolumeSurface& surface(Side s) { return s == Side::Supply ? supply : demand; }
};

/**
 * @brief Normalized auction panel: consecutive days with exactly 24 hourly
 * auctions each, plus any exogenous series aligned to the same (day, hour)
 * index.
 *
 * Immutable once built by ingestion or the synthetic generator; every
 * downstream stage only reads it.
 */
class PanelDataset {
public:
    explicit PanelDataset(PriceGrid grid) : grid_(std::move(grid)) {}

    const PriceGrid& grid() const { return grid_; }
    std::size_t n_days() const { return days_.size(); }
    const Date& date(std::size_t day) const { return days_.at(day); }
    const std::vector<Date>& days() const { return days_; }

    int weekday(std::size_t day) const { return days_.at(day).weekday(); }

    const HourCell& cell(std::size_t day, int hour) const { return cells_.at(day).at(hour); }

    bool has_exog(Exog e) const { return exog_present_[static_cast<int>(e)]; }
    double exog(Exog e, std::size_t day, int hour) const {
        if (!has_exog(e)) {
            throw MissingExogenousError(std::string("exogenous series '") + exog_name(e) +
                                        "' not loaded");
        }
        return exog_[static_cast<int>(e)].at(day).at(hour);
    }

    /// Day indices whose hours were synthesized or merged by DST handling.
    const std::vector<std::size_t>& dst_normalized_days() const { return dst_normalized_days_; }

    std::optional<std::size_t> day_index_of(const Date& d) const {
        if (days_.empty()) return std::nullopt;
        const std::int64_t offset = d.serial() - days_.front().serial();
        if (offset < 0 || offset >= static_cast<std::int64_t>(days_.size())) return std::nullopt;
        return static_cast<std::size_t>(offset);
    }

    /**
     * @brief Fills the price/volume exogenous series with the panel's own
     * market clearing results where they were not provided externally.
     */
    void ensure_price_volume() {
        if (has_exog(Exog::Price) && has_exog(Exog::Volume)) return;
        std::vector<std::array<double, 24>> prices(n_days());
        std::vector<std::array<double, 24>> volumes(n_days());
        for (std::size_t d = 0; d < n_days(); ++d) {
            for (int h = 0; h < 24; ++h) {
                const HourCell& c = cell(d, h);
                const Intersection x =
                    intersect(aggregate_curve(c.supply, grid_), aggregate_curve(c.demand, grid_));
                prices[d][h] = x.price;
                volumes[d][h] = x.volume;
            }
        }
        if (!has_exog(Exog::Price)) set_exog(Exog::Price, std::move(prices));
        if (!has_exog(Exog::Volume)) set_exog(Exog::Volume, std::move(volumes));
    }

    // Builder interface used by ingestion and the synthetic generator.

    void append_day(const Date& d, std::array<HourCell, 24> cells) {
        if (!days_.empty() && d.serial() != days_.back().serial() + 1) {
            throw ValidationError("panel days must be consecutive; gap before " + d.to_string());
        }
        days_.push_back(d);
        cells_.push_back(std::move(cells));
    }

    void set_exog(Exog e, std::vector<std::array<double, 24>> values) {
        if (values.size() != n_days()) {
            throw ValidationError("exogenous series length does not match panel days");
        }
        exog_[static_cast<int>(e)] = std::move(values);
        exog_present_[static_cast<int>(e)] = true;
    }

    void mark_dst_normalized(std::size_t day) { dst_normalized_days_.push_back(day); }

private:
    PriceGrid grid_;
    std::vector<Date> days_;
    std::vector<std::array<HourCell, 24>> cells_;
    std::array<std::vector<std::array<double, 24>>, kExogCount> exog_;
    std::array<bool, kExogCount> exog_present_{};
    std::vector<std::size_t> dst_normalized_days_;
};

/**
 * @brief Pre-normalization panel: per date, a sparse map of hour slots.
 *
 * A regular day has slots 0..23. The March DST day is missing one slot; the
 * October day carries 25 slots labeled 0..24, where slots 2 and 3 are the
 * two occurrences of the doubled wall-clock hour.
 */
struct RawPanel {
    PriceGrid grid;
    std::map<Date, std::map<int, HourCell>> days;
    std::map<Date, std::map<int, std::array<std::optional<double>, kExogCount>>> exog;
    std::array<bool, kExogCount> exog_present{};

    explicit RawPanel(PriceGrid g) : grid(std::move(g)) {}
};

}  // namespace xmodel
