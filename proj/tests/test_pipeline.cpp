#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ozonecast/model_io.hpp"
#include "ozonecast/pipeline.hpp"
#include "ozonecast/rng.hpp"

using namespace ozonecast;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// small linear synthetic dataset in the pipeline CSV schema (no categorical
// parameters) so trains select hidden_dim 0
void write_linear_csv(const fs::path& path, int n, std::uint64_t seed, int year,
                      double noise = 0.5) {
    Rng rng(seed);
    std::ofstream out(path, std::ios::binary);
    out << "date,o3_peak,o3_noon,t_min,t_max,wind_speed\n";
    for (int i = 0; i < n; ++i) {
        const double noon = rng.uniform(40.0, 120.0);
        const double tmin = rng.uniform(8.0, 18.0);
        const double tmax = tmin + rng.uniform(6.0, 14.0);
        const double wind = rng.uniform(0.5, 8.0);
        const double peak = 20.0 + 0.8 * noon + 1.5 * tmax - 2.0 * wind + rng.normal(0.0, noise);
        char row[256];
        std::snprintf(row, sizeof(row), "%04d-%02d-%02d,%.12g,%.12g,%.12g,%.12g,%.12g\n", year,
                      4 + i / 28, 1 + i % 28, peak, noon, tmin, tmax, wind);
        out << row;
    }
}

RunConfig linear_config(const fs::path& dir) {
    RunConfig cfg;
    cfg.train_csv = dir / "train.csv";
    cfg.validation_csv = dir / "validation.csv";
    cfg.out_dir = dir / "out";
    cfg.threshold = 180.0;
    cfg.hidden_range = {0, 1};
    cfg.seed = 7;
    cfg.restarts = 2;
    cfg.schema.categorical.clear();
    cfg.schema.numeric = {"t_min", "t_max", "wind_speed"};
    return cfg;
}

}  // namespace

TEST_CASE("train selects the linear model on linear data and is deterministic") {
    const auto dir = fresh_dir("ozonecast_linear");
    write_linear_csv(dir / "train.csv", 150, 11, 1999);
    write_linear_csv(dir / "validation.csv", 60, 12, 2003);
    RunConfig cfg = linear_config(dir);

    std::ostringstream diag;
    REQUIRE(cmd_train(cfg, diag) == kExitOk);
    const auto model = load_model(cfg.resolved_model_path());
    CHECK(model.kind == "linear");
    CHECK(model.selected_hidden == 0);
    CHECK(fs::exists(cfg.out_dir / "bic_curve.csv"));
    CHECK(fs::exists(cfg.out_dir / "leverages.csv"));

    // byte-identical rerun
    const std::string first_model = slurp(cfg.resolved_model_path());
    const std::string first_summary = slurp(cfg.out_dir / "train_summary.json");
    REQUIRE(cmd_train(cfg, diag) == kExitOk);
    CHECK(slurp(cfg.resolved_model_path()) == first_model);
    CHECK(slurp(cfg.out_dir / "train_summary.json") == first_summary);
}

TEST_CASE("empty sweep range is a usage error (exit 2)") {
    const auto dir = fresh_dir("ozonecast_badrange");
    write_linear_csv(dir / "train.csv", 50, 3, 1999);
    RunConfig cfg = linear_config(dir);
    cfg.hidden_range.clear();
    std::ostringstream diag;
    CHECK(cmd_train(cfg, diag) == kExitUsage);
    CHECK(diag.str().find("sweep range") != std::string::npos);
}

TEST_CASE("evaluate emits the fixed report column order and baseline rows") {
    const auto dir = fresh_dir("ozonecast_eval");
    write_linear_csv(dir / "train.csv", 150, 21, 1999);
    write_linear_csv(dir / "validation.csv", 60, 22, 2003);
    RunConfig cfg = linear_config(dir);
    std::ostringstream diag;
    REQUIRE(cmd_train(cfg, diag) == kExitOk);
    REQUIRE(cmd_evaluate(cfg, diag) == kExitOk);

    std::ifstream report(cfg.out_dir / "report.csv");
    std::string header;
    std::getline(report, header);
    CHECK(header == "model,MBE,MAE,RMSE,RMSE_s,RMSE_u,d,FAR,SI");
    std::string body((std::istreambuf_iterator<char>(report)), std::istreambuf_iterator<char>());
    CHECK(body.find("PERS") != std::string::npos);
    CHECK(body.find("LIN") != std::string::npos);
    CHECK(fs::exists(cfg.out_dir / "forecasts_validation.csv"));
}

TEST_CASE("a noiseless linear season evaluates to d = 1") {
    const auto dir = fresh_dir("ozonecast_perfect");
    write_linear_csv(dir / "train.csv", 120, 61, 1999, 0.0);
    write_linear_csv(dir / "validation.csv", 50, 62, 2003, 0.0);
    RunConfig cfg = linear_config(dir);
    std::ostringstream diag;
    REQUIRE(cmd_train(cfg, diag) == kExitOk);
    REQUIRE(cmd_evaluate(cfg, diag) == kExitOk);
    const auto report = nlohmann::json::parse(slurp(cfg.out_dir / "report.json"));
    bool found = false;
    for (const auto& row : report) {
        if (row["model"] != "LINREG") continue;
        found = true;
        CHECK(row["d"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(row["RMSE"].get<double>() < 1e-6);
    }
    CHECK(found);
}

TEST_CASE("evaluate without a model file exits 2") {
    const auto dir = fresh_dir("ozonecast_nomodel");
    write_linear_csv(dir / "validation.csv", 30, 5, 2003);
    RunConfig cfg = linear_config(dir);
    std::ostringstream diag;
    CHECK(cmd_evaluate(cfg, diag) == kExitUsage);
}

TEST_CASE("forecast flags missing features by name and applies both rules") {
    const auto dir = fresh_dir("ozonecast_forecast");
    write_linear_csv(dir / "train.csv", 150, 31, 1999);
    write_linear_csv(dir / "validation.csv", 60, 32, 2003);
    RunConfig cfg = linear_config(dir);
    std::ostringstream diag;
    REQUIRE(cmd_train(cfg, diag) == kExitOk);

    // a complete new-day file forecasts cleanly (target column left blank)
    {
        std::ofstream out(dir / "days.csv");
        out << "date,o3_peak,o3_noon,t_min,t_max,wind_speed\n";
        out << "2004-06-01,,95,14,27,2.5\n";
        out << "2004-06-02,,105,15,29,1.5\n";
    }
    REQUIRE(cmd_forecast(cfg, dir / "days.csv", diag) == kExitOk);
    std::ifstream fc(cfg.out_dir / "forecast.csv");
    std::string header, row;
    std::getline(fc, header);
    CHECK(header == "date,point,lower,upper,interval_alarm,probability,prob_alarm");
    int rows = 0;
    while (std::getline(fc, row)) ++rows;
    CHECK(rows == 2);

    // a row with a missing predictor names the column
    {
        std::ofstream out(dir / "bad_days.csv");
        out << "date,o3_peak,o3_noon,t_min,t_max,wind_speed\n";
        out << "2004-06-01,,95,14,,2.5\n";
    }
    std::ostringstream diag2;
    CHECK(cmd_forecast(cfg, dir / "bad_days.csv", diag2) == kExitUsage);
    CHECK(diag2.str().find("t_max") != std::string::npos);
}

TEST_CASE("retrain appends the season, versions the model, detects duplicates") {
    const auto dir = fresh_dir("ozonecast_retrain");
    write_linear_csv(dir / "train.csv", 120, 41, 1999);
    write_linear_csv(dir / "validation.csv", 50, 42, 2003);
    write_linear_csv(dir / "season.csv", 40, 43, 2004);
    RunConfig cfg = linear_config(dir);
    std::ostringstream diag;

    REQUIRE(cmd_retrain(cfg, dir / "season.csv", diag) == kExitOk);
    // archive now contains both years
    CsvSchema schema = cfg.schema;
    const auto records = load_csv(dir / "train.csv", schema, nullptr, true);
    CHECK(records.size() == 160);
    // a content-hash versioned copy exists next to the model
    bool versioned = false;
    for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("model-", 0) == 0 && name.size() > 11) versioned = true;
    }
    CHECK(versioned);

    // duplicate dates conflict
    std::ostringstream diag2;
    CHECK(cmd_retrain(cfg, dir / "season.csv", diag2) == kExitUsage);
    CHECK(diag2.str().find("duplicate date") != std::string::npos);

    // training directly on the extended archive reproduces the retrained
    // model byte for byte
    const std::string retrained = slurp(cfg.resolved_model_path());
    RunConfig direct = cfg;
    direct.out_dir = dir / "out_direct";
    REQUIRE(cmd_train(direct, diag2) == kExitOk);
    CHECK(slurp(direct.resolved_model_path()) == retrained);
}

TEST_CASE("plotdata needs evaluation artifacts and then emits the series") {
    const auto dir = fresh_dir("ozonecast_plot");
    write_linear_csv(dir / "train.csv", 150, 51, 1999);
    write_linear_csv(dir / "validation.csv", 60, 52, 2003);
    RunConfig cfg = linear_config(dir);
    std::ostringstream diag;
    CHECK(cmd_plotdata(cfg, diag) == kExitUsage);  // nothing evaluated yet

    REQUIRE(cmd_train(cfg, diag) == kExitOk);
    REQUIRE(cmd_evaluate(cfg, diag) == kExitOk);
    REQUIRE(cmd_plotdata(cfg, diag) == kExitOk);

    // one scatter pair per validation day
    std::ifstream scatter(cfg.out_dir / "plot_scatter.csv");
    std::string line;
    std::getline(scatter, line);
    int rows = 0;
    while (std::getline(scatter, line)) ++rows;
    CHECK(rows == 60);
    CHECK(fs::exists(cfg.out_dir / "plot_timeseries.csv"));
    CHECK(fs::exists(cfg.out_dir / "plot_residuals.csv"));
    CHECK(fs::exists(cfg.out_dir / "plot_residuals_flagged.csv"));
}

TEST_CASE("synth writes seasons with the requested exceedance plan") {
    const auto dir = fresh_dir("ozonecast_synth");
    SynthConfig sc;
    sc.train_days = 200;
    sc.validation_days = 105;
    sc.planted_validation_exceedances = 7;
    sc.seed = 3;
    std::ostringstream diag;
    REQUIRE(cmd_synth(sc, dir / "train.csv", dir / "validation.csv", diag) == kExitOk);

    const auto schema = synth_schema();
    const auto train = load_csv(dir / "train.csv", schema, nullptr, true);
    const auto validation = load_csv(dir / "validation.csv", schema, nullptr, true);
    CHECK(train.size() == 200);
    CHECK(validation.size() == 105);
    std::size_t exceed = 0;
    for (const auto& r : validation) exceed += r.target_peak >= 180.0 ? 1 : 0;
    CHECK(exceed == 7);
    std::size_t train_exceed = 0;
    for (const auto& r : train) train_exceed += r.target_peak >= 180.0 ? 1 : 0;
    CHECK(train_exceed >= 1);

    // deterministic regeneration
    REQUIRE(cmd_synth(sc, dir / "train2.csv", dir / "validation2.csv", diag) == kExitOk);
    CHECK(slurp(dir / "train.csv") == slurp(dir / "train2.csv"));
}

TEST_CASE("nonlinear season trains nets, classifier, and interval targets") {
    const auto dir = fresh_dir("ozonecast_season");
    SynthConfig sc;
    sc.train_days = 220;
    sc.validation_days = 60;
    sc.planted_validation_exceedances = 4;
    sc.seed = 12;
    std::ostringstream diag;
    REQUIRE(cmd_synth(sc, dir / "train.csv", dir / "validation.csv", diag) == kExitOk);

    RunConfig cfg;
    cfg.train_csv = dir / "train.csv";
    cfg.validation_csv = dir / "validation.csv";
    cfg.out_dir = dir / "out";
    cfg.hidden_range = {1};
    cfg.seed = 3;
    cfg.restarts = 2;
    cfg.bic_on = BicTarget::train;
    cfg.target_mode = TargetMode::interval_augmented;
    REQUIRE(cmd_train(cfg, diag) == kExitOk);

    const auto model = load_model(cfg.resolved_model_path());
    CHECK(model.kind == "mlp");
    CHECK(model.interval.has_value());
    CHECK(fs::exists(cfg.classifier_path()));
    const auto cls = load_model(cfg.classifier_path());
    CHECK(cls.net->output == OutputKind::sigmoid);
    CHECK(cls.scaling.kind == ScalingKind::minmax);

    REQUIRE(cmd_evaluate(cfg, diag) == kExitOk);
    std::ifstream report(cfg.out_dir / "report.csv");
    std::string all((std::istreambuf_iterator<char>(report)), std::istreambuf_iterator<char>());
    CHECK(all.find("CLASSIFIER") != std::string::npos);
    CHECK(fs::exists(cfg.out_dir / "logistic.model.json"));
    CHECK(fs::exists(cfg.out_dir / "lin.model.json"));

    REQUIRE(cmd_plotdata(cfg, diag) == kExitOk);
    std::ifstream prob(cfg.out_dir / "plot_probability.csv");
    std::string header;
    std::getline(prob, header);
    CHECK(header == "date,probability,decision,observed_exceedance");
    std::string row;
    int rows = 0;
    while (std::getline(prob, row)) {
        const auto first_comma = row.find(',');
        const auto second_comma = row.find(',', first_comma + 1);
        const double p = std::stod(row.substr(first_comma + 1, second_comma - first_comma - 1));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        ++rows;
    }
    CHECK(rows == 60);
}

TEST_CASE("config file round-trip with flag semantics") {
    const auto dir = fresh_dir("ozonecast_config");
    {
        std::ofstream out(dir / "config.json");
        out << R"({
  "train_csv": "a.csv",
  "threshold": 120.0,
  "hidden_range": [0, 1, 2, 3],
  "balance": {"a": 1.0, "b": 0.0125, "theta": 120.0, "multiplier": 2},
  "baselines": ["pers"],
  "target_mode": "interval",
  "bic_on": "train",
  "seed": 99
})";
    }
    const RunConfig cfg = config_from_json(dir / "config.json");
    CHECK(cfg.train_csv == "a.csv");
    CHECK(cfg.threshold == doctest::Approx(120.0));
    CHECK(cfg.hidden_range == std::vector<int>{0, 1, 2, 3});
    REQUIRE(cfg.balance.has_value());
    CHECK(cfg.balance->multiplier == 2);
    CHECK(cfg.baseline_pers);
    CHECK_FALSE(cfg.baseline_lin);
    CHECK(cfg.target_mode == TargetMode::interval_augmented);
    CHECK(cfg.bic_on == BicTarget::train);
    CHECK(cfg.seed == 99);
}
