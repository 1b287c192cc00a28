#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "xmodel/model.hpp"
#include "xmodel/pipeline.hpp"
#include "xmodel/synthetic.hpp"

using namespace xmodel;

namespace {

/// Shared fitted fixture; fitting is the expensive part, so do it once. The
/// panel lives behind a stable pointer because WindowFit references it.
struct FittedFixture {
    std::unique_ptr<PanelDataset> panel_holder;
    PipelineSettings settings;
    WindowFit fit;

    const PanelDataset& panel() const { return *panel_holder; }

    static const FittedFixture& get() {
        static FittedFixture* fx = [] {
            SyntheticConfig config;
            config.days = 140;
            auto [generated, truth] = generate_synthetic(config, 31);
            auto panel = std::make_unique<PanelDataset>(std::move(generated));
            PipelineSettings settings;
            settings.window_days = 139;
            settings.bootstrap_draws = 0;
            settings.seed = 5;
            settings.threads = 2;
            WindowFit fit = fit_window(*panel, 0, 139, settings);
            return new FittedFixture{std::move(panel), settings, std::move(fit)};
        }();
        return *fx;
    }
};

std::size_t column_index_of(const FeatureSpace& space, int m, int h, const ColumnKey& want) {
    const auto keys = enumerate_columns(space, m, h);
    for (std::size_t c = 0; c < keys.size(); ++c) {
        if (keys[c] == want) return c;
    }
    throw std::runtime_error("column not found");
}

}  // namespace

TEST_CASE("a model with no coefficients forecasts the window mean") {
    const auto& fx = FittedFixture::get();
    FittedClassModel null_model = fx.fit.models[2][7];
    null_model.coef.clear();
    CHECK(point_forecast(null_model, fx.fit.centered) == null_model.mu);
}

TEST_CASE("a pure lag-7 unit coefficient forecasts the value one week earlier") {
    const auto& fx = FittedFixture::get();
    const int m = 1, h = 4;
    FittedClassModel persistence = fx.fit.models[m][h];
    persistence.coef = {{static_cast<std::uint32_t>(column_index_of(
                             fx.fit.space, m, h,
                             {ColumnKey::Kind::Lag, static_cast<std::int16_t>(m),
                              static_cast<std::int8_t>(h), 7})),
                         1.0}};
    const double forecast = point_forecast(persistence, fx.fit.centered);
    const std::size_t target = fx.fit.centered.window_end();
    const double week_ago = fx.fit.centered.value(m, target - 7, h) + persistence.mu;
    CHECK(forecast == Catch::Approx(week_ago).epsilon(1e-12));
}

TEST_CASE("the forecast equation reproduces a planted noiseless recursion") {
    // plant X_d = 0.7 X_{d-1} + 0.3 X_{d-7}: a convex combination, so the
    // window-mean term cancels exactly and the planted next value is the
    // unique correct forecast
    const auto& fx = FittedFixture::get();
    const std::size_t days = fx.panel().n_days();
    FeatureSpace space;
    space.m_s = 1;
    space.m_d = 1;
    ClassVolumeSeries volumes;
    volumes.supply.assign(1, std::vector<std::array<double, 24>>(days));
    volumes.demand.assign(1, std::vector<std::array<double, 24>>(days));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(500.0, 1500.0);
    for (std::size_t d = 0; d < days; ++d) {
        for (int h = 0; h < 24; ++h) {
            volumes.demand[0][d][h] = 100.0;
            volumes.supply[0][d][h] =
                d < 7 ? unif(rng)
                      : 0.7 * volumes.supply[0][d - 1][h] + 0.3 * volumes.supply[0][d - 7][h];
        }
    }
    CenteredPanel centered(fx.panel(), volumes, space, 0, days - 1);
    FittedClassModel model;
    model.process = 0;
    model.hour = 9;
    model.mu = centered.mean(0, 9);
    model.coef = {
        {static_cast<std::uint32_t>(
             column_index_of(space, 0, 9, {ColumnKey::Kind::Lag, 0, 9, 1})),
         0.7},
        {static_cast<std::uint32_t>(
             column_index_of(space, 0, 9, {ColumnKey::Kind::Lag, 0, 9, 7})),
         0.3}};
    const double forecast = point_forecast(model, centered);
    const std::size_t target = days - 1;
    const double planted =
        0.7 * volumes.supply[0][target - 1][9] + 0.3 * volumes.supply[0][target - 7][9];
    REQUIRE(forecast == Catch::Approx(planted).margin(1e-8));
}

TEST_CASE("bootstrap with one draw and zero residuals returns the point forecast") {
    const auto& fx = FittedFixture::get();
    auto models = fx.fit.models;
    for (auto& per_hour : models) {
        for (auto& m : per_hour) std::fill(m.residuals.begin(), m.residuals.end(), 0.0);
    }
    const ForecastSample sample = bootstrap_forecast(models, fx.fit.centered, 1, 77);
    REQUIRE(sample.draws.size() == 1);
    for (std::size_t c = 0; c < sample.point.size(); ++c) {
        for (int h = 0; h < 24; ++h) {
            REQUIRE(sample.draws[0][c][h] == sample.point[c][h]);
        }
    }
}

TEST_CASE("bootstrap draws are reproducible from the seed") {
    const auto& fx = FittedFixture::get();
    const ForecastSample a = bootstrap_forecast(fx.fit.models, fx.fit.centered, 64, 123);
    const ForecastSample b = bootstrap_forecast(fx.fit.models, fx.fit.centered, 64, 123);
    REQUIRE(a.drawn_days == b.drawn_days);
    for (std::size_t i = 0; i < a.draws.size(); ++i) {
        REQUIRE(a.draws[i] == b.draws[i]);
    }
    const ForecastSample c = bootstrap_forecast(fx.fit.models, fx.fit.centered, 64, 124);
    REQUIRE(a.drawn_days != c.drawn_days);
}

TEST_CASE("bootstrap rejects a non-positive draw count") {
    const auto& fx = FittedFixture::get();
    CHECK_THROWS_AS(bootstrap_forecast(fx.fit.models, fx.fit.centered, 0, 1), ConfigError);
}

TEST_CASE("draw means concentrate on the point forecast") {
    const auto& fx = FittedFixture::get();
    const int b = 10000;
    const ForecastSample sample = bootstrap_forecast(fx.fit.models, fx.fit.centered, b, 2024);
    for (std::size_t c = 0; c < sample.point.size(); ++c) {
        for (int h = 0; h < 24; ++h) {
            double mean = 0.0;
            for (const auto& draw : sample.draws) mean += draw[c][h];
            mean /= b;
            const auto& resid = fx.fit.models[c][h].residuals;
            double sd = 0.0;
            for (double r : resid) sd += r * r;
            sd = std::sqrt(sd / resid.size());
            REQUIRE(std::abs(mean - sample.point[c][h]) <= 3.0 * sd / std::sqrt(double(b)) + 1e-12);
        }
    }
}

TEST_CASE("each draw applies one whole day's residual block coherently") {
    const auto& fx = FittedFixture::get();
    const ForecastSample sample = bootstrap_forecast(fx.fit.models, fx.fit.centered, 200, 55);
    const auto& days = fx.fit.models.front().front().residual_days;
    for (std::size_t b = 0; b < sample.draws.size(); ++b) {
        const std::size_t day = sample.drawn_days[b];
        const std::size_t row =
            static_cast<std::size_t>(std::find(days.begin(), days.end(), day) - days.begin());
        REQUIRE(row < days.size());
        for (std::size_t c = 0; c < sample.point.size(); ++c) {
            for (int h = 0; h < 24; ++h) {
                const double expected =
                    sample.point[c][h] + fx.fit.models[c][h].residuals[row];
                REQUIRE(sample.draws[b][c][h] == Catch::Approx(expected).margin(1e-12));
            }
        }
    }
}

TEST_CASE("fitted models expose aligned residual days and audit fields") {
    const auto& fx = FittedFixture::get();
    const auto& days = fx.fit.models.front().front().residual_days;
    REQUIRE(days.size() == fx.fit.centered.window_length() - kMaxLagDepth);
    for (const auto& per_hour : fx.fit.models) {
        for (const auto& m : per_hour) {
            REQUIRE(m.residual_days == days);
            REQUIRE(m.residuals.size() == days.size());
            CHECK(m.sigma2 >= 0.0);
        }
    }
}

TEST_CASE("a planted Sunday step shows up in the fitted weekday forecasts") {
    SyntheticConfig config;
    config.days = 160;
    config.weekday_amp = 0.0;
    config.sunday_bump = 500.0;
    auto [panel, truth] = generate_synthetic(config, 91);
    PipelineSettings settings;
    settings.bootstrap_draws = 0;
    settings.threads = 2;

    // two consecutive targets: day 158 and 159; find which is a Sunday
    std::vector<double> forecasts(7, 0.0);
    std::vector<int> weekdays(7, 0);
    for (int offset = 0; offset < 7; ++offset) {
        const std::size_t target = panel.n_days() - 7 + offset;
        settings.window_days = target;
        const WindowFit fit = fit_window(panel, 0, target, settings);
        // class 0 is the supply must-run class carrying the bump
        forecasts[offset] = point_forecast(fit.models[0][12], fit.centered);
        weekdays[offset] = panel.weekday(target);
    }
    double sunday = 0.0, monday = 0.0;
    for (int i = 0; i < 7; ++i) {
        if (weekdays[i] == 7) sunday = forecasts[i];
        if (weekdays[i] == 1) monday = forecasts[i];
    }
    CHECK(sunday - monday == Catch::Approx(500.0).margin(120.0));
}
