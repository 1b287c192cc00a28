#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xmodel/errors.hpp"
#include "xmodel/panel.hpp"
#include "xmodel/text.hpp"

namespace xmodel {

inline constexpr const char* kAuctionHeader = "date,hour,side,price,volume";
inline constexpr const char* kExogenousHeader = "date,hour,name,value";

namespace detail {

inline int parse_hour_slot(std::string_view field, std::size_t line) {
    const long h = parse_long(field, line);
    if (h < 0 || h > 24) throw ValidationError("hour slot out of range 0..24", line);
    return static_cast<int>(h);
}

inline void ingest_auction_row(RawPanel& panel, const std::vector<std::string_view>& fields,
                               std::size_t line) {
    if (fields.size() != 5) throw ParseError("expected 5 fields date,hour,side,price,volume", line);
    Date date;
    try {
        date = Date::parse(std::string(fields[0]));
    } catch (const ValidationError& e) {
        throw ParseError(e.what(), line);
    }
    const int slot = parse_hour_slot(fields[1], line);
    if (fields[2].size() != 1) throw ParseError("side must be a single character S or D", line);
    Side side;
    try {
        side = side_from_code(fields[2][0]);
    } catch (const ValidationError&) {
        throw ValidationError(std::string("invalid side code '") + std::string(fields[2]) + "'",
                              line);
    }
    const double price = parse_double(fields[3], line);
    const double volume = parse_double(fields[4], line);
    if (!panel.grid.contains(price)) {
        throw ValidationError("price " + std::string(fields[3]) + " is not on the bid grid", line);
    }
    if (!(volume > 0.0)) {
        throw ValidationError("bid volume must be positive, got " + std::string(fields[4]), line);
    }
    panel.days[date][slot].surface(side).add(panel.grid.index_of(price), volume);
}

}  // namespace detail

/**
 * @brief Parses long-format auction CSV (one bid per row) into a raw panel.
 *
 * Expected header: `date,hour,side,price,volume`. Prices must lie on the
 * grid, volumes must be positive; violations name the offending line.
 */
inline RawPanel load_auctions(std::istream& in, const PriceGrid& grid) {
    RawPanel panel(grid);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty auction file", 1);
    ++lineno;
    if (strip_cr(line) != kAuctionHeader) {
        throw ParseError(std::string("expected header '") + kAuctionHeader + "'", lineno);
    }
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view sv = strip_cr(line);
        if (sv.empty()) continue;
        detail::ingest_auction_row(panel, split_csv(sv), lineno);
    }
    return panel;
}

inline RawPanel load_auctions(const std::string& path, const PriceGrid& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open auction file: " + path);
    return load_auctions(in, grid);
}

/**
 * @brief Parses exogenous CSV `date,hour,name,value` into the raw panel.
 *
 * A series mentioned anywhere must end up complete over the panel; this is
 * checked during normalization.
 */
inline void load_exogenous(std::istream& in, RawPanel& panel) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty exogenous file", 1);
    ++lineno;
    if (strip_cr(line) != kExogenousHeader) {
        throw ParseError(std::string("expected header '") + kExogenousHeader + "'", lineno);
    }
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view sv = strip_cr(line);
        if (sv.empty()) continue;
        const auto fields = split_csv(sv);
        if (fields.size() != 4) throw ParseError("expected 4 fields date,hour,name,value", lineno);
        Date date;
        try {
            date = Date::parse(std::string(fields[0]));
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), lineno);
        }
        const int slot = detail::parse_hour_slot(fields[1], lineno);
        const Exog series = exog_from_name(std::string(fields[2]), lineno);
        const double value = parse_double(fields[3], lineno);
        panel.exog[date][slot][static_cast<int>(series)] = value;
        panel.exog_present[static_cast<int>(series)] = true;
    }
}

inline void load_exogenous(const std::string& path, RawPanel& panel) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open exogenous file: " + path);
    load_exogenous(in, panel);
}

namespace detail {

/// Per-price arithmetic mean of two bid surfaces.
inline VolumeSurface mean_surface_of_two(const VolumeSurface& a, const VolumeSurface& b) {
    VolumeSurface out(a.side());
    std::set<Tick> prices;
    for (const auto& [t, v] : a.entries()) prices.insert(t);
    for (const auto& [t, v] : b.entries()) prices.insert(t);
    for (Tick t : prices) {
        const double m = 0.5 * (a.volume_at(t) + b.volume_at(t));
        if (m > 0.0) out.add(t, m);
    }
    return out;
}

inline HourCell mean_cell_of_two(const HourCell& a, const HourCell& b) {
    HourCell out;
    out.supply = mean_surface_of_two(a.supply, b.supply);
    out.demand = mean_surface_of_two(a.demand, b.demand);
    return out;
}

}  // namespace detail

/**
 * @brief Normalizes a raw panel to exactly 24 hours per day.
 *
 * March short day: the missing hour is synthesized as the per-price mean of
 * the two adjacent hours. October long day (25 slots, the doubled wall-clock
 * hour in slots 2 and 3): the two observations are merged by per-price mean
 * and later slots shift down. Any other irregular slot pattern raises
 * IrregularDayError. Exogenous values follow the same averaging.
 */
inline PanelDataset normalize_dst(const RawPanel& raw) {
    if (raw.days.empty()) throw EmptyPanelError("no auction data loaded");
    PanelDataset panel(raw.grid);
    std::vector<std::array<std::array<std::optional<double>, kExogCount>, 24>> exog_buffer_;

    for (const auto& [date, slots] : raw.days) {
        std::array<HourCell, 24> cells;
        std::array<std::array<std::optional<double>, kExogCount>, 24> exovals{};
        const auto exo_day = raw.exog.find(date);
        const auto exo_slot = [&](int s) -> std::array<std::optional<double>, kExogCount> {
            if (exo_day == raw.exog.end()) return {};
            auto it = exo_day->second.find(s);
            return it == exo_day->second.end() ? std::array<std::optional<double>, kExogCount>{}
                                               : it->second;
        };

        bool normalized = false;
        if (slots.size() == 24) {
            for (const auto& [s, cell] : slots) {
                if (s < 0 || s > 23) {
                    throw IrregularDayError("day " + date.to_string() +
                                            " has 24 slots but uses slot " + std::to_string(s));
                }
                cells[s] = cell;
                exovals[s] = exo_slot(s);
            }
        } else if (slots.size() == 23) {
            int missing = -1;
            for (int h = 0; h < 24; ++h) {
                if (!slots.count(h)) {
                    if (missing >= 0) {
                        throw IrregularDayError("day " + date.to_string() +
                                                " is missing more than one hour");
                    }
                    missing = h;
                }
            }
            if (missing <= 0 || missing >= 23 || slots.count(24)) {
                throw IrregularDayError("day " + date.to_string() +
                                        " has an irregular 23-slot pattern");
            }
            for (const auto& [s, cell] : slots) {
                cells[s] = cell;
                exovals[s] = exo_slot(s);
            }
            cells[missing] = detail::mean_cell_of_two(cells[missing - 1], cells[missing + 1]);
            for (int e = 0; e < kExogCount; ++e) {
                const auto& lo = exovals[missing - 1][e];
                const auto& hi = exovals[missing + 1][e];
                if (lo && hi) exovals[missing][e] = 0.5 * (*lo + *hi);
            }
            normalized = true;
        } else if (slots.size() == 25) {
            for (int s = 0; s <= 24; ++s) {
                if (!slots.count(s)) {
                    throw IrregularDayError("day " + date.to_string() +
                                            " has 25 slots but is missing slot " +
                                            std::to_string(s));
                }
            }
            // Slots 0,1 map to hours 0,1; slots 2+3 are the doubled hour;
            // slots 4..24 map to hours 3..23.
            for (int s = 0; s <= 1; ++s) {
                cells[s] = slots.at(s);
                exovals[s] = exo_slot(s);
            }
            cells[2] = detail::mean_cell_of_two(slots.at(2), slots.at(3));
            for (int e = 0; e < kExogCount; ++e) {
                const auto a = exo_slot(2)[e];
                const auto b = exo_slot(3)[e];
                if (a && b) exovals[2][e] = 0.5 * (*a + *b);
            }
            for (int s = 4; s <= 24; ++s) {
                cells[s - 1] = slots.at(s);
                exovals[s - 1] = exo_slot(s);
            }
            normalized = true;
        } else {
            throw IrregularDayError("day " + date.to_string() + " has " +
                                    std::to_string(slots.size()) + " hour slots");
        }

        for (int h = 0; h < 24; ++h) {
            if (cells[h].supply.empty() || cells[h].demand.empty()) {
                throw ValidationError("no bids for " + date.to_string() + " hour " +
                                      std::to_string(h) + " on at least one side");
            }
        }

        const std::size_t day_index = panel.n_days();
        panel.append_day(date, std::move(cells));
        if (normalized) panel.mark_dst_normalized(day_index);

        for (int e = 0; e < kExogCount; ++e) {
            if (!raw.exog_present[e]) continue;
            for (int h = 0; h < 24; ++h) {
                if (!exovals[h][e]) {
                    throw ValidationError(std::string("exogenous series '") +
                                          exog_name(static_cast<Exog>(e)) + "' missing at " +
                                          date.to_string() + " hour " + std::to_string(h));
                }
            }
        }
        exog_buffer_.push_back(exovals);
    }

    for (int e = 0; e < kExogCount; ++e) {
        if (!raw.exog_present[e]) continue;
        std::vector<std::array<double, 24>> series(panel.n_days());
        for (std::size_t d = 0; d < panel.n_days(); ++d) {
            for (int h = 0; h < 24; ++h) series[d][h] = *exog_buffer_[d][h][e];
        }
        panel.set_exog(static_cast<Exog>(e), std::move(series));
    }
    exog_buffer_.clear();
    return panel;
}

/**
 * @brief Writes the normalized panel in the versioned container format.
 *
 * Deterministic ordering and shortest round-trip number formatting make
 * save/load byte-exact.
 */
inline void save_panel(const PanelDataset& panel, std::ostream& out) {
    out << "# xmodel panel v1\n";
    out << "[auctions]\n" << kAuctionHeader << "\n";
    for (std::size_t d = 0; d < panel.n_days(); ++d) {
        const std::string date = panel.date(d).to_string();
        for (int h = 0; h < 24; ++h) {
            for (Side side : {Side::Supply, Side::Demand}) {
                for (const auto& [tick, volume] : panel.cell(d, h).surface(side).entries()) {
                    out << date << ',' << h << ',' << side_code(side) << ','
                        << format_double(panel.grid().price_at(tick)) << ','
                        << format_double(volume) << '\n';
                }
            }
        }
    }
    out << "[exogenous]\n" << kExogenousHeader << "\n";
    for (std::size_t d = 0; d < panel.n_days(); ++d) {
        const std::string date = panel.date(d).to_string();
        for (int h = 0; h < 24; ++h) {
            for (int e = 0; e < kExogCount; ++e) {
                const Exog series = static_cast<Exog>(e);
                if (!panel.has_exog(series)) continue;
                out << date << ',' << h << ',' << exog_name(series) << ','
                    << format_double(panel.exog(series, d, h)) << '\n';
            }
        }
    }
    out << "[meta]\n";
    out << "dst_normalized=";
    bool first = true;
    for (std::size_t d : panel.dst_normalized_days()) {
        if (!first) out << ',';
        out << panel.date(d).to_string();
        first = false;
    }
    out << '\n';
}

inline void save_panel(const PanelDataset& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write panel file: " + path);
    save_panel(panel, out);
}

/// Reads a panel container written by save_panel.
inline PanelDataset load_panel(std::istream& in, const PriceGrid& grid) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || strip_cr(line) != "# xmodel panel v1") {
        throw ParseError("not an xmodel panel v1 file", lineno);
    }
    RawPanel raw(grid);
    enum class Section { None, Auctions, Exogenous, Meta } section = Section::None;
    std::vector<Date> dst_dates;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view sv = strip_cr(line);
        if (sv.empty()) continue;
        if (sv == "[auctions]") { section = Section::Auctions; continue; }
        if (sv == "[exogenous]") { section = Section::Exogenous; continue; }
        if (sv == "[meta]") { section = Section::Meta; continue; }
        switch (section) {
            case Section::Auctions: {
                if (sv == kAuctionHeader) continue;
                detail::ingest_auction_row(raw, split_csv(sv), lineno);
                break;
            }
            case Section::Exogenous: {
                if (sv == kExogenousHeader) continue;
                const auto fields = split_csv(sv);
                if (fields.size() != 4) throw ParseError("expected 4 exogenous fields", lineno);
                const Date date = Date::parse(std::string(fields[0]));
                const int slot = detail::parse_hour_slot(fields[1], lineno);
                const Exog series = exog_from_name(std::string(fields[2]), lineno);
                raw.exog[date][slot][static_cast<int>(series)] = parse_double(fields[3], lineno);
                raw.exog_present[static_cast<int>(series)] = true;
                break;
            }
            case Section::Meta: {
                if (sv.rfind("dst_normalized=", 0) == 0) {
                    const std::string_view list = sv.substr(15);
                    if (!list.empty()) {
                        for (const auto& tok : split_csv(list)) {
                            dst_dates.push_back(Date::parse(std::string(tok)));
                        }
                    }
                }
                break;
            }
            case Section::None:
                throw ParseError("content before any section", lineno);
        }
    }
    PanelDataset panel = normalize_dst(raw);
    for (const Date& d : dst_dates) {
        if (auto idx = panel.day_index_of(d)) panel.mark_dst_normalized(*idx);
    }
    return panel;
}

inline PanelDataset load_panel(const std::string& path, const PriceGrid& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open panel file: " + path);
    return load_panel(in, grid);
}

}  // namespace xmodel
