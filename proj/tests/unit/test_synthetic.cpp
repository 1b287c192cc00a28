#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "xmodel/ingest.hpp"
#include "xmodel/synthetic.hpp"

using namespace xmodel;

namespace {

SyntheticConfig small_config() {
    SyntheticConfig c;
    c.days = 90;
    return c;
}

std::string panel_bytes(const PanelDataset& panel) {
    std::ostringstream out;
    save_panel(panel, out);
    return out.str();
}

/// Sum of the panel's bid volumes over one planted group's prices.
double group_volume_in_panel(const PanelDataset& panel, const SyntheticGroup& g, std::size_t d,
                             int h) {
    const VolumeSurface& surf = panel.cell(d, h).surface(g.side);
    double sum = 0.0;
    for (const auto& slot : g.slots) sum += surf.volume_at(slot.tick);
    return sum;
}

}  // namespace

TEST_CASE("generate_synthetic is deterministic in the seed") {
    auto [p1, t1] = generate_synthetic(small_config(), 321);
    auto [p2, t2] = generate_synthetic(small_config(), 321);
    REQUIRE(panel_bytes(p1) == panel_bytes(p2));
    auto [p3, t3] = generate_synthetic(small_config(), 322);
    REQUIRE(panel_bytes(p1) != panel_bytes(p3));
}

TEST_CASE("generate_synthetic rejects too-short panels") {
    SyntheticConfig c;
    c.days = 59;
    CHECK_THROWS_AS(generate_synthetic(c, 1), ConfigError);
}

TEST_CASE("zero-noise class volumes follow the planted recursion exactly") {
    SyntheticConfig c = small_config();
    c.noise_scale = 0.0;
    auto [panel, truth] = generate_synthetic(c, 9);
    for (std::size_t gi = 0; gi < truth.groups.size(); ++gi) {
        const SyntheticGroup& g = truth.groups[gi];
        for (std::size_t d = truth.burn_in_days; d < panel.n_days(); ++d) {
            for (int h = 0; h < 24; ++h) {
                const auto renew = [&](std::size_t day) {
                    return panel.exog(Exog::Wind, day, h) + panel.exog(Exog::Solar, day, h);
                };
                const double m = g.mean_level(panel.weekday(d), h, renew(d));
                const double m1 = g.mean_level(panel.weekday(d - 1), h, renew(d - 1));
                const double m7 = g.mean_level(panel.weekday(d - 7), h, renew(d - 7));
                const double x = group_volume_in_panel(panel, g, d, h);
                const double x1 = group_volume_in_panel(panel, g, d - 1, h);
                const double x7 = group_volume_in_panel(panel, g, d - 7, h);
                const double planted = m + g.phi1 * (x1 - m1) + g.phi7 * (x7 - m7);
                REQUIRE(x == Catch::Approx(planted).margin(1e-9 * std::max(1.0, planted)));
                REQUIRE(x == Catch::Approx(truth.group_volumes[gi][d][h]).margin(1e-12));
            }
        }
    }
}

TEST_CASE("a planted Sunday bump moves the Sunday mean by that amount") {
    SyntheticConfig c;
    c.days = 180;
    c.weekday_amp = 0.0;
    c.sunday_bump = 500.0;
    auto [panel, truth] = generate_synthetic(c, 14);
    const SyntheticGroup& mustrun = truth.groups[0];  // supply must-run carries the bump
    REQUIRE(mustrun.side == Side::Supply);
    double sunday = 0.0, monday = 0.0;
    std::size_t n_sun = 0, n_mon = 0;
    for (std::size_t d = truth.burn_in_days; d < panel.n_days(); ++d) {
        for (int h = 0; h < 24; ++h) {
            const double x = group_volume_in_panel(panel, mustrun, d, h);
            // strip the deterministic hour/renewables structure, keep weekday
            const double detrended =
                x - mustrun.mean_level(panel.weekday(d), h,
                                       panel.exog(Exog::Wind, d, h) +
                                           panel.exog(Exog::Solar, d, h)) +
                mustrun.weekday[panel.weekday(d) - 1];
            if (panel.weekday(d) == 7) {
                sunday += detrended;
                ++n_sun;
            } else if (panel.weekday(d) == 1) {
                monday += detrended;
                ++n_mon;
            }
        }
    }
    const double diff = sunday / n_sun - monday / n_mon;
    CHECK(diff == Catch::Approx(500.0).margin(40.0));
}

TEST_CASE("synthetic panels carry all exogenous series") {
    auto [panel, truth] = generate_synthetic(small_config(), 3);
    for (int e = 0; e < kExogCount; ++e) REQUIRE(panel.has_exog(static_cast<Exog>(e)));
    // solar is zero at night
    for (std::size_t d = 0; d < panel.n_days(); ++d) {
        CHECK(panel.exog(Exog::Solar, d, 0) == 0.0);
        CHECK(panel.exog(Exog::Solar, d, 23) == 0.0);
    }
    // price/volume equal the panel's own clearing results
    const HourCell& cell = panel.cell(10, 12);
    const Intersection x = intersect(aggregate_curve(cell.supply, panel.grid()),
                                     aggregate_curve(cell.demand, panel.grid()));
    CHECK(panel.exog(Exog::Price, 10, 12) == x.price);
    CHECK(panel.exog(Exog::Volume, 10, 12) == x.volume);
}
