#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "xmodel/features.hpp"
#include "xmodel/synthetic.hpp"

using namespace xmodel;

namespace {

/// Independent combinatorial count of the lag-set rule.
std::size_t oracle_column_count(int M) {
    const std::size_t own_own = 36;
    const std::size_t own_cross_hour = 23ull * 8;
    const std::size_t cross_own_hour = static_cast<std::size_t>(M - 1) * 8;
    const std::size_t cross_cross = static_cast<std::size_t>(M - 1) * 23 * 1;
    const std::size_t dummies = 6;
    return own_own + own_cross_hour + cross_own_hour + cross_cross + dummies;
}

struct Fixture {
    PanelDataset panel;
    ClassVolumeSeries volumes;
    FeatureSpace space;

    static Fixture make(int days = 140, std::uint64_t seed = 5) {
        SyntheticConfig c;
        c.days = days;
        auto [panel, truth] = generate_synthetic(c, seed);
        FeatureSpace space;
        space.m_s = 2;
        space.m_d = 1;
        ClassVolumeSeries volumes;
        // hand-coded class volumes: value encodes (process, day, hour)
        volumes.supply.assign(2, std::vector<std::array<double, 24>>(panel.n_days()));
        volumes.demand.assign(1, std::vector<std::array<double, 24>>(panel.n_days()));
        for (std::size_t d = 0; d < panel.n_days(); ++d) {
            for (int h = 0; h < 24; ++h) {
                volumes.supply[0][d][h] = 1e6 + d * 100.0 + h;
                volumes.supply[1][d][h] = 2e6 + d * 100.0 + h;
                volumes.demand[0][d][h] = 3e6 + d * 100.0 + h;
            }
        }
        return Fixture{std::move(panel), std::move(volumes), space};
    }
};

}  // namespace

TEST_CASE("enumerate_columns matches the lag-set rule exactly") {
    FeatureSpace space;
    space.m_s = 2;
    space.m_d = 1;  // M = 8 with the five exogenous processes
    const int m = 0, h = 2;
    const auto keys = enumerate_columns(space, m, h);

    // collect lags per (l, j) and compare against the displayed case rule
    std::map<std::pair<int, int>, std::set<int>> lags;
    std::size_t dummies = 0;
    for (const auto& key : keys) {
        if (key.kind == ColumnKey::Kind::Weekday) {
            ++dummies;
            continue;
        }
        lags[{key.l, key.j}].insert(key.k);
    }
    REQUIRE(dummies == 6);
    for (int l = 0; l < space.total(); ++l) {
        for (int j = 0; j < 24; ++j) {
            std::set<int> expected;
            if (l == m && j == h) {
                for (int k = 1; k <= 36; ++k) expected.insert(k);
            } else if (l == m || j == h) {
                for (int k = 1; k <= 8; ++k) expected.insert(k);
            } else {
                expected.insert(1);
            }
            REQUIRE(lags[{l, j}] == expected);
        }
    }
}

TEST_CASE("column order is process-major, then hour, then lag, dummies last") {
    FeatureSpace space;
    space.m_s = 1;
    space.m_d = 1;
    const auto keys = enumerate_columns(space, 0, 0);
    // first columns: own process, hour 0, lags 1..36
    for (int k = 1; k <= 36; ++k) {
        CHECK(keys[k - 1].l == 0);
        CHECK(keys[k - 1].j == 0);
        CHECK(keys[k - 1].k == k);
    }
    CHECK(keys[36].j == 1);  // next hour follows
    for (int k = 0; k < 6; ++k) {
        const ColumnKey& key = keys[keys.size() - 6 + k];
        CHECK(key.kind == ColumnKey::Kind::Weekday);
        CHECK(key.k == k + 2);
    }
}

TEST_CASE("column count for the paper-sized space is the combinatorial total") {
    FeatureSpace space;
    space.m_s = 16;
    space.m_d = 16;  // M = 37
    REQUIRE(space.total() == 37);
    for (int h : {0, 2, 23}) {
        const auto keys = enumerate_columns(space, 3, h);
        REQUIRE(keys.size() == oracle_column_count(37));
        REQUIRE(keys.size() == 1342u);
    }
}

TEST_CASE("design rows read lagged values and planned processes at day d+1") {
    Fixture fx = Fixture::make();
    CenteredPanel centered(fx.panel, fx.volumes, fx.space, 0, 120);
    const int m = 1, h = 5;
    const Design design = build_design(centered, m, h);
    REQUIRE(design.x.rows() == 120 - 36);
    REQUIRE(design.row_days.front() == 36);

    const auto col_of = [&](ColumnKey want) -> std::size_t {
        for (std::size_t c = 0; c < design.columns.size(); ++c) {
            if (design.columns[c] == want) return c;
        }
        FAIL("column not found");
        return 0;
    };

    // own-class lag 7 at the target hour for row day 50
    const std::size_t row = 50 - 36;
    const std::size_t c_own =
        col_of({ColumnKey::Kind::Lag, static_cast<std::int16_t>(m), static_cast<std::int8_t>(h), 7});
    CHECK(design.x(row, c_own) ==
          Catch::Approx(fx.volumes.supply[1][43][h] - centered.mean(m, h)).margin(1e-9));

    // planned solar, lag 1, another hour: reads calendar day 50 (= d - 1 + 1)
    const int solar = fx.space.n_classes() + 4;
    const std::size_t c_solar =
        col_of({ColumnKey::Kind::Lag, static_cast<std::int16_t>(solar), 12, 1});
    CHECK(design.x(row, c_solar) ==
          Catch::Approx(fx.panel.exog(Exog::Solar, 50, 12) - centered.mean(solar, 12)).margin(1e-9));

    // response is the centered own value
    CHECK(design.y(row) ==
          Catch::Approx(fx.volumes.supply[1][50][h] - centered.mean(m, h)).margin(1e-9));

    // weekday dummy column: 1 exactly when the weekday number is below k
    const std::size_t c_w3 = col_of({ColumnKey::Kind::Weekday, 0, 0, 3});
    CHECK(design.x(row, c_w3) == (fx.panel.weekday(50) < 3 ? 1.0 : 0.0));
}

TEST_CASE("planned-process columns cover all 24 hours of the target day at lag 1") {
    FeatureSpace space;
    space.m_s = 2;
    space.m_d = 1;
    const auto keys = enumerate_columns(space, 0, 2);
    const int solar = space.n_classes() + 4;
    int lag1_hours = 0;
    for (const auto& key : keys) {
        if (key.kind == ColumnKey::Kind::Lag && key.l == solar && key.k == 1) ++lag1_hours;
    }
    // lag 1 of the shifted process is the target day itself, all 24 hours
    CHECK(lag1_hours == 24);
}

TEST_CASE("build_design requires 36 lags plus 37 rows") {
    Fixture fx = Fixture::make(140);
    CenteredPanel short_panel(fx.panel, fx.volumes, fx.space, 0, 72);
    CHECK_THROWS_AS(build_design(short_panel, 0, 0), InsufficientHistoryError);
    CenteredPanel ok_panel(fx.panel, fx.volumes, fx.space, 0, 73);
    CHECK(build_design(ok_panel, 0, 0).x.rows() == 37);
}

TEST_CASE("centered panel means are window sample means") {
    Fixture fx = Fixture::make();
    CenteredPanel centered(fx.panel, fx.volumes, fx.space, 10, 110);
    double sum = 0.0;
    for (std::size_t d = 10; d < 110; ++d) sum += fx.volumes.supply[0][d][7];
    CHECK(centered.mean(0, 7) == Catch::Approx(sum / 100.0).epsilon(1e-12));
    // stored values have zero mean over the window
    double centered_sum = 0.0;
    for (std::size_t d = 10; d < 110; ++d) centered_sum += centered.value(0, d, 7);
    CHECK(centered_sum == Catch::Approx(0.0).margin(1e-9 * std::abs(sum)));
}

TEST_CASE("standardize scales columns and response to unit variance") {
    Design design;
    design.x.resize(8, 3);
    design.y.resize(8);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 8; ++r) {
        design.x(r, 0) = 2.0 * gauss(rng);   // arbitrary variance
        design.x(r, 1) = 7.7;                // constant: dropped
        design.x(r, 2) = gauss(rng);
        design.y(r) = 3.0 * gauss(rng);
    }
    // force column 0 to variance exactly 4 and column 2 to variance 1
    const auto set_variance = [&](Eigen::Index c, double target) {
        Eigen::VectorXd col = design.x.col(c);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / col.size();
        design.x.col(c) = (col.array() - mean) * std::sqrt(target / var) + mean;
    };
    set_variance(0, 4.0);
    set_variance(2, 1.0);

    const StandardizedDesign sd = standardize(design);
    REQUIRE(sd.kept.size() == 2);
    REQUIRE(sd.dropped == std::vector<std::size_t>{1});
    CHECK(sd.column_scale[0] == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(sd.column_scale[1] == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(sd.x.col(1) == design.x.col(2));  // unit-variance column unchanged

    const auto var_of = [](const Eigen::VectorXd& v) {
        const double mean = v.mean();
        return (v.array() - mean).square().sum() / v.size();
    };
    CHECK(var_of(sd.x.col(0)) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(var_of(sd.y) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rescaled coefficients reproduce scaled predictions exactly") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Design design;
    design.x.resize(50, 6);
    design.y.resize(50);
    for (int r = 0; r < 50; ++r) {
        for (int c = 0; c < 6; ++c) design.x(r, c) = (c + 1.0) * gauss(rng);
        design.y(r) = 5.0 * gauss(rng);
    }
    const StandardizedDesign sd = standardize(design);
    Eigen::VectorXd beta_scaled(6);
    for (int c = 0; c < 6; ++c) beta_scaled(c) = gauss(rng);

    Eigen::VectorXd pred_scaled = sd.x * beta_scaled * sd.y_scale;
    Eigen::VectorXd beta_raw = Eigen::VectorXd::Zero(6);
    for (std::size_t c = 0; c < sd.kept.size(); ++c) {
        beta_raw(static_cast<Eigen::Index>(sd.kept[c])) =
            beta_scaled(static_cast<Eigen::Index>(c)) * sd.y_scale / sd.column_scale[c];
    }
    Eigen::VectorXd pred_raw = design.x * beta_raw;
    REQUIRE((pred_scaled - pred_raw).cwiseAbs().maxCoeff() < 1e-10);
}
