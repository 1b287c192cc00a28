#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "xmodel/ingest.hpp"
#include "xmodel/synthetic.hpp"

using namespace xmodel;

namespace {

const PriceGrid kGrid = PriceGrid::epex();

std::string full_day_csv(const std::string& date, int hours = 24) {
    std::ostringstream out;
    out << kAuctionHeader << "\n";
    for (int h = 0; h < hours; ++h) {
        out << date << ',' << h << ",S,-500,1000\n";
        out << date << ',' << h << ",S,25.5," << (10 + h) << "\n";
        out << date << ',' << h << ",D,3000,900\n";
        out << date << ',' << h << ",D,12.3," << (5 + h) << "\n";
    }
    return out.str();
}

RawPanel raw_from(const std::string& csv) {
    std::istringstream in(csv);
    return load_auctions(in, kGrid);
}

}  // namespace

TEST_CASE("load_auctions parses a well-formed row") {
    RawPanel raw = raw_from("date,hour,side,price,volume\n2015-04-12,13,S,-65.0,12.5\n");
    const Date d{2015, 4, 12};
    REQUIRE(raw.days.count(d) == 1);
    const HourCell& cell = raw.days.at(d).at(13);
    CHECK(cell.supply.volume_at(kGrid.index_of(-65.0)) == 12.5);
    CHECK(cell.demand.empty());
}

TEST_CASE("load_auctions rejects zero volume") {
    CHECK_THROWS_AS(raw_from("date,hour,side,price,volume\n2015-04-12,13,S,-65.0,0\n"),
                    ValidationError);
}

TEST_CASE("load_auctions rejects off-grid prices with the line number") {
    try {
        raw_from("date,hour,side,price,volume\n2015-04-12,3,S,10.05,5\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("load_auctions rejects malformed rows as ParseError") {
    CHECK_THROWS_AS(raw_from("date,hour,side,price,volume\nnot-a-date,3,S,10,5\n"), ParseError);
    CHECK_THROWS_AS(raw_from("date,hour,side,price,volume\n2015-01-01,3,S,10\n"), ParseError);
    CHECK_THROWS_AS(raw_from("wrong,header\n"), ParseError);
    CHECK_THROWS_AS(raw_from("date,hour,side,price,volume\n2015-01-01,3,X,10,5\n"),
                    ValidationError);
}

TEST_CASE("a file with 24x2 groups yields one complete panel day") {
    PanelDataset panel = normalize_dst(raw_from(full_day_csv("2015-04-12")));
    REQUIRE(panel.n_days() == 1);
    CHECK(panel.dst_normalized_days().empty());
    for (int h = 0; h < 24; ++h) {
        CHECK_FALSE(panel.cell(0, h).supply.empty());
        CHECK_FALSE(panel.cell(0, h).demand.empty());
    }
}

TEST_CASE("normalize_dst synthesizes the missing March hour as the neighbor mean") {
    std::ostringstream csv;
    csv << kAuctionHeader << "\n";
    for (int h = 0; h < 24; ++h) {
        if (h == 2) continue;  // the missing hour
        csv << "2015-03-29," << h << ",S,-500,1000\n";
        csv << "2015-03-29," << h << ",D,3000,900\n";
        const double v = h == 1 ? 10.0 : (h == 3 ? 20.0 : 5.0);
        csv << "2015-03-29," << h << ",S,30," << v << "\n";
    }
    PanelDataset panel = normalize_dst(raw_from(csv.str()));
    REQUIRE(panel.n_days() == 1);
    REQUIRE(panel.dst_normalized_days() == std::vector<std::size_t>{0});
    CHECK(panel.cell(0, 2).supply.volume_at(kGrid.index_of(30.0)) == 15.0);
    CHECK(panel.cell(0, 2).supply.volume_at(kGrid.index_of(-500.0)) == 1000.0);
    CHECK(panel.cell(0, 2).demand.volume_at(kGrid.index_of(3000.0)) == 900.0);
}

TEST_CASE("normalize_dst leaves a regular day unchanged") {
    PanelDataset panel = normalize_dst(raw_from(full_day_csv("2015-06-01")));
    CHECK(panel.cell(0, 7).supply.volume_at(kGrid.index_of(25.5)) == 17.0);
    CHECK(panel.dst_normalized_days().empty());
}

TEST_CASE("normalize_dst merges the doubled October hour by per-price mean") {
    std::ostringstream csv;
    csv << kAuctionHeader << "\n";
    for (int s = 0; s <= 24; ++s) {
        csv << "2014-10-26," << s << ",S,-500,1000\n";
        csv << "2014-10-26," << s << ",D,3000,900\n";
        if (s == 2) csv << "2014-10-26,2,S,40,8\n";
        if (s == 3) csv << "2014-10-26,3,S,40,12\n";
        if (s == 24) csv << "2014-10-26,24,S,55,7\n";
    }
    PanelDataset panel = normalize_dst(raw_from(csv.str()));
    REQUIRE(panel.n_days() == 1);
    REQUIRE(panel.dst_normalized_days() == std::vector<std::size_t>{0});
    CHECK(panel.cell(0, 2).supply.volume_at(kGrid.index_of(40.0)) == 10.0);
    // slot 24 shifts down to hour 23
    CHECK(panel.cell(0, 23).supply.volume_at(kGrid.index_of(55.0)) == 7.0);
}

TEST_CASE("normalize_dst rejects irregular slot patterns") {
    // 22 hours
    std::ostringstream csv;
    csv << kAuctionHeader << "\n";
    for (int h = 0; h < 24; ++h) {
        if (h == 2 || h == 5) continue;
        csv << "2015-03-29," << h << ",S,-500,10\n";
        csv << "2015-03-29," << h << ",D,3000,10\n";
    }
    CHECK_THROWS_AS(normalize_dst(raw_from(csv.str())), IrregularDayError);
}

TEST_CASE("normalize_dst preserves total volume away from transition hours") {
    auto [panel, truth] = generate_synthetic([] {
        SyntheticConfig c;
        c.days = 60;
        return c;
    }(), 5);
    double before = 0.0;
    for (std::size_t d = 0; d < panel.n_days(); ++d) {
        for (int h = 0; h < 24; ++h) before += panel.cell(d, h).supply.total_volume();
    }
    std::ostringstream buffer;
    save_panel(panel, buffer);
    std::istringstream in(buffer.str());
    PanelDataset reloaded = load_panel(in, kGrid);
    double after = 0.0;
    for (std::size_t d = 0; d < reloaded.n_days(); ++d) {
        for (int h = 0; h < 24; ++h) after += reloaded.cell(d, h).supply.total_volume();
    }
    CHECK(after == Catch::Approx(before).epsilon(1e-12));
}

TEST_CASE("panel save/load round-trips byte-exactly") {
    auto [panel, truth] = generate_synthetic([] {
        SyntheticConfig c;
        c.days = 60;
        return c;
    }(), 11);
    std::ostringstream first;
    save_panel(panel, first);
    std::istringstream in(first.str());
    PanelDataset reloaded = load_panel(in, kGrid);
    std::ostringstream second;
    save_panel(reloaded, second);
    REQUIRE(first.str() == second.str());

    REQUIRE(reloaded.n_days() == panel.n_days());
    for (std::size_t d = 0; d < panel.n_days(); ++d) {
        for (int h = 0; h < 24; ++h) {
            REQUIRE(reloaded.cell(d, h).supply.entries() == panel.cell(d, h).supply.entries());
            REQUIRE(reloaded.cell(d, h).demand.entries() == panel.cell(d, h).demand.entries());
            for (int e = 0; e < kExogCount; ++e) {
                const Exog series = static_cast<Exog>(e);
                REQUIRE(reloaded.exog(series, d, h) == panel.exog(series, d, h));
            }
        }
    }
}

TEST_CASE("exogenous rows load and align with the panel") {
    std::string auctions = full_day_csv("2015-06-01");
    std::ostringstream exo;
    exo << kExogenousHeader << "\n";
    for (int h = 0; h < 24; ++h) {
        for (const char* name : {"price", "volume", "generation", "wind", "solar"}) {
            exo << "2015-06-01," << h << ',' << name << ',' << (h + 0.5) << "\n";
        }
    }
    RawPanel raw = raw_from(auctions);
    std::istringstream in(exo.str());
    load_exogenous(in, raw);
    PanelDataset panel = normalize_dst(raw);
    CHECK(panel.exog(Exog::Wind, 0, 7) == 7.5);
    CHECK(panel.has_exog(Exog::Solar));
}

TEST_CASE("incomplete exogenous series are rejected") {
    RawPanel raw = raw_from(full_day_csv("2015-06-01"));
    std::istringstream in("date,hour,name,value\n2015-06-01,3,wind,5.0\n");
    load_exogenous(in, raw);
    CHECK_THROWS_AS(normalize_dst(raw), ValidationError);
}
