// Command-line front-end: ingest auction data, fit the forecasting stack,
// produce day-ahead forecasts and run rolling out-of-sample studies.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "xmodel/benchmarks/external.hpp"
#include "xmodel/benchmarks/models.hpp"
#include "xmodel/evaluation.hpp"
#include "xmodel/ingest.hpp"
#include "xmodel/pipeline.hpp"
#include "xmodel/pipeline_io.hpp"
#include "xmodel/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitMissingExogenous = 4;
constexpr int kExitStudy = 5;

/// Effective run configuration; config-file values first, flags override.
struct RunConfig {
    std::string auctions_path;
    std::string exogenous_path;
    std::string panel_path;
    std::string models_path;
    std::string external_path;
    std::string out_dir = ".";
    std::string target_date;
    std::string oos_begin;
    std::string oos_end;
    std::vector<std::string> models = {"x-model", "persistent"};

    std::size_t window_days = 730;
    double v_star = 1000.0;
    int lambda_grid_size = 100;
    double lambda_min_ratio = 1e-4;
    double cd_tol = 1e-7;
    long cd_max_sweeps = 100000;
    int bic_patience = 12;
    int bootstrap_draws = 10000;  // B
    double threshold = xmodel::kDefaultActivityThreshold;
    bool pool_activity_hours = false;
    std::optional<std::uint64_t> seed;
    int threads = 0;

    // synth knobs
    int synth_days = 120;
    int synth_groups = 3;
    double synth_noise = 1.0;
    double synth_sunday_bump = 0.0;
    double synth_weekday_amp = 120.0;
    std::string synth_start = "2015-01-01";

    xmodel::PipelineSettings pipeline() const {
        xmodel::PipelineSettings s;
        s.window_days = window_days;
        s.v_star = v_star;
        s.lasso.grid_size = lambda_grid_size;
        s.lasso.min_ratio = lambda_min_ratio;
        s.lasso.tol = cd_tol;
        s.lasso.max_sweeps = cd_max_sweeps;
        s.lasso.bic_patience = bic_patience;
        s.threshold = threshold;
        s.pool_activity_hours = pool_activity_hours;
        s.bootstrap_draws = bootstrap_draws;
        s.seed = seed.value_or(0);
        s.threads = threads;
        return s;
    }

    ordered_json to_json() const {
        ordered_json j;
        j["auctions"] = auctions_path;
        j["exogenous"] = exogenous_path;
        j["panel"] = panel_path;
        j["models_file"] = models_path;
        j["external_forecasts"] = external_path;
        j["out"] = out_dir;
        j["target"] = target_date;
        j["oos_begin"] = oos_begin;
        j["oos_end"] = oos_end;
        j["models"] = models;
        j["window_days"] = window_days;
        j["V_star"] = v_star;
        j["lambda_grid_size"] = lambda_grid_size;
        j["lambda_min_ratio"] = lambda_min_ratio;
        j["cd_tol"] = cd_tol;
        j["cd_max_sweeps"] = cd_max_sweeps;
        j["bic_patience"] = bic_patience;
        j["B"] = bootstrap_draws;
        j["threshold"] = threshold;
        j["pool_activity_hours"] = pool_activity_hours;
        if (seed) j["seed"] = *seed;
        j["threads"] = threads;
        j["synth"] = {{"days", synth_days},       {"groups", synth_groups},
                      {"noise", synth_noise},     {"sunday_bump", synth_sunday_bump},
                      {"weekday_amp", synth_weekday_amp}, {"start", synth_start}};
        return j;
    }
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw xmodel::ConfigError("cannot open config file: " + path);
    ordered_json j = ordered_json::parse(in);
    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("auctions", cfg.auctions_path);
    get("exogenous", cfg.exogenous_path);
    get("panel", cfg.panel_path);
    get("models_file", cfg.models_path);
    get("external_forecasts", cfg.external_path);
    get("out", cfg.out_dir);
    get("target", cfg.target_date);
    get("oos_begin", cfg.oos_begin);
    get("oos_end", cfg.oos_end);
    get("models", cfg.models);
    get("window_days", cfg.window_days);
    get("V_star", cfg.v_star);
    get("lambda_grid_size", cfg.lambda_grid_size);
    get("lambda_min_ratio", cfg.lambda_min_ratio);
    get("cd_tol", cfg.cd_tol);
    get("cd_max_sweeps", cfg.cd_max_sweeps);
    get("bic_patience", cfg.bic_patience);
    get("B", cfg.bootstrap_draws);
    get("threshold", cfg.threshold);
    get("pool_activity_hours", cfg.pool_activity_hours);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    get("threads", cfg.threads);
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        if (s.contains("days")) cfg.synth_days = s.at("days").get<int>();
        if (s.contains("groups")) cfg.synth_groups = s.at("groups").get<int>();
        if (s.contains("noise")) cfg.synth_noise = s.at("noise").get<double>();
        if (s.contains("sunday_bump")) cfg.synth_sunday_bump = s.at("sunday_bump").get<double>();
        if (s.contains("weekday_amp")) cfg.synth_weekday_amp = s.at("weekday_amp").get<double>();
        if (s.contains("start")) cfg.synth_start = s.at("start").get<std::string>();
    }
}

void require_seed(const RunConfig& cfg, const std::string& command) {
    if (!cfg.seed) {
        throw xmodel::ConfigError("command '" + command +
                                  "' is stochastic; --seed (or config seed) is mandatory");
    }
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw xmodel::ConfigError("cannot write " + path.string());
    out << content;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_text(dir / "config.json", cfg.to_json().dump(1, '\t') + "\n");
    return dir;
}

xmodel::SyntheticConfig synth_config(const RunConfig& cfg) {
    xmodel::SyntheticConfig sc;
    sc.days = cfg.synth_days;
    sc.interior_groups = cfg.synth_groups;
    sc.noise_scale = cfg.synth_noise;
    sc.sunday_bump = cfg.synth_sunday_bump;
    sc.weekday_amp = cfg.synth_weekday_amp;
    sc.start = xmodel::Date::parse(cfg.synth_start);
    return sc;
}

ordered_json truth_to_json(const xmodel::SyntheticTruth& truth, const xmodel::PriceGrid& grid) {
    ordered_json groups = ordered_json::array();
    for (const auto& g : truth.groups) {
        ordered_json jg;
        jg["side"] = std::string(1, xmodel::side_code(g.side));
        ordered_json slots = ordered_json::array();
        for (const auto& s : g.slots) {
            slots.push_back({{"price", grid.price_at(s.tick)},
                             {"weight", s.weight},
                             {"activity", s.activity}});
        }
        jg["slots"] = std::move(slots);
        jg["base"] = g.base;
        jg["season"] = g.season;
        jg["weekday"] = g.weekday;
        jg["renew_center"] = g.renew_center;
        jg["phi1"] = g.phi1;
        jg["phi7"] = g.phi7;
        jg["renew_beta"] = g.renew_beta;
        jg["sigma"] = g.sigma;
        groups.push_back(std::move(jg));
    }
    ordered_json root;
    root["burn_in_days"] = truth.burn_in_days;
    root["groups"] = std::move(groups);
    return root;
}

/// Histogram of per-auction distinct bid price counts, per side.
ordered_json price_count_histogram(const xmodel::PanelDataset& panel) {
    ordered_json out;
    for (xmodel::Side side : {xmodel::Side::Supply, xmodel::Side::Demand}) {
        std::map<std::size_t, std::size_t> hist;  // bucket (width 10) -> auctions
        std::size_t total = 0, auctions = 0;
        for (std::size_t d = 0; d < panel.n_days(); ++d) {
            for (int h = 0; h < 24; ++h) {
                const std::size_t n = panel.cell(d, h).surface(side).size();
                hist[n / 10 * 10] += 1;
                total += n;
                ++auctions;
            }
        }
        ordered_json jh;
        for (const auto& [bucket, count] : hist) jh[std::to_string(bucket)] = count;
        out[side == xmodel::Side::Supply ? "supply" : "demand"] = {
            {"auctions", auctions},
            {"mean_distinct_prices", static_cast<double>(total) / auctions},
            {"histogram_bucket10", std::move(jh)}};
    }
    return out;
}

xmodel::PanelDataset load_panel_checked(const RunConfig& cfg) {
    if (cfg.panel_path.empty()) throw xmodel::ConfigError("--panel is required");
    return xmodel::load_panel(cfg.panel_path, xmodel::PriceGrid::epex());
}

std::size_t resolve_day(const xmodel::PanelDataset& panel, const std::string& date,
                        const char* what) {
    if (date.empty()) throw xmodel::ConfigError(std::string(what) + " date is required");
    const auto idx = panel.day_index_of(xmodel::Date::parse(date));
    if (!idx) throw xmodel::ConfigError(std::string(what) + " " + date + " is not in the panel");
    return *idx;
}

int cmd_synth(const RunConfig& cfg) {
    require_seed(cfg, "synth");
    const fs::path dir = prepare_out_dir(cfg);
    auto [panel, truth] = xmodel::generate_synthetic(synth_config(cfg), *cfg.seed);
    xmodel::save_panel(panel, (dir / "panel.txt").string());
    write_text(dir / "truth.json", truth_to_json(truth, panel.grid()).dump(1, '\t') + "\n");
    write_text(dir / "summary.json", price_count_histogram(panel).dump(1, '\t') + "\n");
    std::cout << "synthetic panel: " << panel.n_days() << " days -> " << (dir / "panel.txt")
              << "\n";
    return 0;
}

int cmd_ingest(const RunConfig& cfg, bool synthetic) {
    if (synthetic) return cmd_synth(cfg);
    if (cfg.auctions_path.empty()) throw xmodel::ConfigError("--auctions is required");
    const fs::path dir = prepare_out_dir(cfg);
    const xmodel::PriceGrid grid = xmodel::PriceGrid::epex();
    xmodel::RawPanel raw = xmodel::load_auctions(cfg.auctions_path, grid);
    if (!cfg.exogenous_path.empty()) xmodel::load_exogenous(cfg.exogenous_path, raw);
    xmodel::PanelDataset panel = xmodel::normalize_dst(raw);
    panel.ensure_price_volume();
    xmodel::save_panel(panel, (dir / "panel.txt").string());
    ordered_json summary = price_count_histogram(panel);
    summary["days"] = panel.n_days();
    summary["first_day"] = panel.date(0).to_string();
    summary["last_day"] = panel.date(panel.n_days() - 1).to_string();
    summary["dst_normalized_days"] = panel.dst_normalized_days().size();
    write_text(dir / "summary.json", summary.dump(1, '\t') + "\n");
    std::cout << "panel: " << panel.n_days() << " days -> " << (dir / "panel.txt") << "\n";
    return 0;
}

int cmd_fit(const RunConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    const xmodel::PanelDataset panel = load_panel_checked(cfg);
    const std::size_t target = cfg.target_date.empty()
                                   ? panel.n_days() - 1
                                   : resolve_day(panel, cfg.target_date, "--target");
    if (target < cfg.window_days) {
        throw xmodel::InsufficientHistoryError("panel too short for the requested window");
    }
    const xmodel::PipelineSettings settings = cfg.pipeline();
    const xmodel::WindowFit fit =
        xmodel::fit_window(panel, target - cfg.window_days, target, settings);
    xmodel::save_window_fit(fit, panel, (dir / "models.json").string());
    {
        std::ofstream out(dir / "fit_report.csv");
        xmodel::export_fit_report(fit, out);
    }
    {
        std::ofstream out(dir / "partition.csv");
        xmodel::export_partition_csv(fit.supply_partition, fit.demand_partition, out);
    }
    std::cout << "fitted " << fit.space.n_classes() << " classes x 24 hours -> "
              << (dir / "models.json") << "\n";
    return 0;
}

int cmd_forecast(const RunConfig& cfg) {
    if (cfg.bootstrap_draws >= 1) require_seed(cfg, "forecast");
    const fs::path dir = prepare_out_dir(cfg);
    const xmodel::PanelDataset panel = load_panel_checked(cfg);
    const std::size_t target = resolve_day(panel, cfg.target_date, "--target");
    const xmodel::PipelineSettings settings = cfg.pipeline();

    std::optional<xmodel::WindowFit> fit;
    if (!cfg.models_path.empty()) {
        fit.emplace(xmodel::load_window_fit(panel, cfg.models_path));
        if (fit->window_end != target) {
            throw xmodel::ConfigError("model container was fitted for " +
                                      panel.date(fit->window_end).to_string() +
                                      ", not the requested target");
        }
    } else {
        if (target < cfg.window_days) {
            throw xmodel::InsufficientHistoryError("panel too short for the requested window");
        }
        fit.emplace(xmodel::fit_window(panel, target - cfg.window_days, target, settings));
    }
    const xmodel::DayForecast day = xmodel::forecast_day(panel, *fit, settings);
    {
        std::ofstream out(dir / "forecast_report.csv");
        xmodel::export_forecast_report(day, panel, /*volumes=*/false, out);
    }
    {
        std::ofstream out(dir / "volume_report.csv");
        xmodel::export_forecast_report(day, panel, /*volumes=*/true, out);
    }
    if (cfg.bootstrap_draws >= 1) {
        std::ofstream out(dir / "curves.csv");
        xmodel::export_curve_forecast(panel, *fit, day, settings, {0.05, 0.5, 0.95}, out);
    }
    std::cout << "forecast for " << panel.date(target).to_string() << " -> "
              << (dir / "forecast_report.csv") << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
    const xmodel::PanelDataset panel = load_panel_checked(cfg);
    bool want_xmodel = false;
    for (const auto& id : cfg.models) {
        if (id == "x-model" && cfg.bootstrap_draws >= 1) want_xmodel = true;
    }
    if (want_xmodel) require_seed(cfg, "evaluate");
    const fs::path dir = prepare_out_dir(cfg);

    xmodel::bench::ExternalForecasts external;
    if (!cfg.external_path.empty()) external.load(cfg.external_path);

    xmodel::bench::PersistentModel persistent;
    xmodel::bench::UnivariateArModel ar;
    xmodel::bench::HourlyArModel ar24;
    xmodel::bench::RegimeSwitchingModel regime(cfg.seed.value_or(7));
    std::vector<std::unique_ptr<xmodel::bench::ExternalModel>> externals;

    xmodel::StudyConfig study;
    study.pipeline = cfg.pipeline();
    study.run_xmodel = false;
    for (const auto& id : cfg.models) {
        if (id == "x-model") {
            study.run_xmodel = true;
        } else if (id == "persistent") {
            study.benchmarks.push_back(&persistent);
        } else if (id == "ar") {
            study.benchmarks.push_back(&ar);
        } else if (id == "ar24") {
            study.benchmarks.push_back(&ar24);
        } else if (id == "regime") {
            study.benchmarks.push_back(&regime);
        } else if (external.table(id)) {
            externals.push_back(std::make_unique<xmodel::bench::ExternalModel>(id, external));
            study.benchmarks.push_back(externals.back().get());
        } else {
            throw xmodel::ConfigError("unknown model '" + id + "'");
        }
    }
    study.oos_begin = resolve_day(panel, cfg.oos_begin, "--oos-begin");
    study.oos_end = resolve_day(panel, cfg.oos_end, "--oos-end") + 1;

    const xmodel::StudyRecords records = xmodel::rolling_study(panel, study);
    const xmodel::ScoreTable table = xmodel::score_table(records);
    {
        std::ofstream out(dir / "score_table.csv");
        xmodel::export_score_table(table, out);
    }
    {
        std::ofstream out(dir / "hourly_scores.csv");
        xmodel::export_hourly_scores(table, out);
    }
    for (const auto& [model, outcomes] : records.outcomes) {
        bool any_quantiles = false;
        for (const auto& o : outcomes) any_quantiles |= o.ok && !o.quantiles.empty();
        if (!any_quantiles) continue;
        const xmodel::CoverageReport report = xmodel::coverage_of(records, model);
        std::ofstream out(dir / ("coverage_" + model + ".csv"));
        xmodel::export_coverage(report, out);
    }
    std::cout << "study over " << records.targets.size() << " days -> "
              << (dir / "score_table.csv") << "\n";
    return 0;
}

int dispatch(const std::string& command, const RunConfig& cfg, bool synthetic) {
    if (command == "synth") return cmd_synth(cfg);
    if (command == "ingest") return cmd_ingest(cfg, synthetic);
    if (command == "fit") return cmd_fit(cfg);
    if (command == "forecast") return cmd_forecast(cfg);
    if (command == "evaluate") return cmd_evaluate(cfg);
    throw xmodel::ConfigError("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"X-Model day-ahead electricity price forecasting"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::uint64_t seed_flag = 0;
    bool synthetic = false;

    app.add_option("--config", config_path, "JSON config file; flags override its values");
    auto* seed_opt = app.add_option("--seed", seed_flag, "root seed for stochastic commands");
    app.add_option("--threads", cfg.threads, "worker threads, 0 = all cores");
    app.add_option("--out", cfg.out_dir, "output directory");

    auto* synth = app.add_subcommand("synth", "generate a synthetic panel with ground truth");
    synth->add_option("--days", cfg.synth_days);
    synth->add_option("--groups", cfg.synth_groups);
    synth->add_option("--noise", cfg.synth_noise);
    synth->add_option("--sunday-bump", cfg.synth_sunday_bump);
    synth->add_option("--weekday-amp", cfg.synth_weekday_amp);
    synth->add_option("--start", cfg.synth_start);

    auto* ingest = app.add_subcommand("ingest", "parse and normalize auction data");
    ingest->add_option("--auctions", cfg.auctions_path);
    ingest->add_option("--exogenous", cfg.exogenous_path);
    ingest->add_flag("--synthetic", synthetic, "generate a synthetic panel instead of parsing");
    ingest->add_option("--days", cfg.synth_days);

    auto* fit = app.add_subcommand("fit", "fit price classes and all class models");
    auto* forecast = app.add_subcommand("forecast", "point + probabilistic day-ahead forecast");
    auto* evaluate = app.add_subcommand("evaluate", "rolling out-of-sample study");
    for (CLI::App* sub : {fit, forecast, evaluate}) {
        sub->add_option("--panel", cfg.panel_path);
        sub->add_option("--window-days", cfg.window_days);
        sub->add_option("--v-star", cfg.v_star);
        sub->add_option("--lambda-grid-size", cfg.lambda_grid_size);
        sub->add_option("--lambda-min-ratio", cfg.lambda_min_ratio);
        sub->add_option("--cd-tol", cfg.cd_tol);
        sub->add_option("--cd-max-sweeps", cfg.cd_max_sweeps);
        sub->add_option("--bic-patience", cfg.bic_patience);
        sub->add_option("--B", cfg.bootstrap_draws);
        sub->add_option("--threshold", cfg.threshold);
        sub->add_flag("--pool-activity-hours", cfg.pool_activity_hours);
    }
    fit->add_option("--target", cfg.target_date);
    forecast->add_option("--target", cfg.target_date);
    forecast->add_option("--models-file", cfg.models_path);
    evaluate->add_option("--oos-begin", cfg.oos_begin);
    evaluate->add_option("--oos-end", cfg.oos_end);
    evaluate->add_option("--models", cfg.models)->delimiter(',');
    evaluate->add_option("--external", cfg.external_path);

    // Parse once to learn the config path, apply the file, then reparse so
    // command-line flags win over config values.
    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            apply_config_file(cfg, config_path);
            app.clear();
            app.parse(argc, argv);
        }
        if (seed_opt->count() > 0) cfg.seed = seed_flag;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const xmodel::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, cfg, synthetic);
    } catch (const xmodel::MissingExogenousError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingExogenous;
    } catch (const xmodel::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const xmodel::DegenerateRegimeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const xmodel::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const xmodel::InsufficientHistoryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return command == "evaluate" ? kExitStudy : kExitSolver;
    } catch (const xmodel::PartitionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return command == "evaluate" ? kExitStudy : kExitSolver;
    } catch (const xmodel::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return command == "evaluate" ? kExitStudy : kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return command == "evaluate" ? kExitStudy : 1;
    }
}
