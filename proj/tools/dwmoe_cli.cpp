// Command-line front end: synthetic data generation, ensemble training,
// walk-forward prediction, and the two benchmark experiments.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dwmoe/dwmoe.hpp"

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

dwmoe::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return dwmoe::json::parse(in);
}

struct GenDataArgs {
    std::string kind;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t n = 200;
    double noise = 0.1;
    std::string spec_path;
};

void run_gen_data(const GenDataArgs& args) {
    std::ostringstream body;
    if (args.kind == "crescents") {
        dwmoe::write_crescents_csv(dwmoe::gen_crescents(args.n, args.noise, args.seed), body);
    } else {
        dwmoe::DriftSpec spec = args.spec_path.empty()
                                    ? dwmoe::default_drift_spec(args.seed)
                                    : dwmoe::drift_spec_from_json(load_json_file(args.spec_path));
        spec.seed = args.seed;
        const dwmoe::DriftSeries series = dwmoe::gen_drifting_series(spec);
        dwmoe::write_change_csv(series.features, series.targets, body);
    }
    write_file(args.out, body.str());
}

struct TrainArgs {
    std::string data;
    std::string config;
    std::string out;
};

void run_train(const TrainArgs& args) {
    const dwmoe::ExperimentConfig cfg =
        dwmoe::experiment_config_from_json(load_json_file(args.config));
    const std::vector<dwmoe::Sample> samples =
        dwmoe::load_samples_file(args.data, cfg.target_feature);
    if (samples.empty()) throw std::runtime_error("no samples in '" + args.data + "'");

    dwmoe::GrowthConfig g = cfg.growth;
    g.seed = dwmoe::derive_seed(cfg.seed, 0);
    const dwmoe::GrowthResult grown =
        dwmoe::grow_ensemble(samples, dwmoe::zero_line(cfg.region_features), g, cfg.train,
                             cfg.ensemble.lambda, cfg.ensemble.window);
    write_file(args.out, dwmoe::to_json(grown.ensemble).dump(2) + "\n");
    std::cerr << "trained ensemble of " << grown.ensemble.size() << " experts, training nse "
              << grown.error_trace.back() << " (" << grown.candidates_accepted << "/"
              << grown.candidates_tried << " candidates kept)\n";
}

struct PredictArgs {
    std::string ensemble;
    std::string data;
    std::string scheme = "dynamic";
    std::string out;
    std::string format = "csv";
};

void run_predict(const PredictArgs& args) {
    const dwmoe::Ensemble ensemble = dwmoe::ensemble_from_json(load_json_file(args.ensemble));
    const std::vector<dwmoe::Sample> samples = dwmoe::load_samples_file(args.data, 0);
    const std::size_t warmup = ensemble.window();
    if (samples.size() <= warmup)
        throw std::runtime_error("insufficient data: need more than " + std::to_string(warmup) +
                                 " samples for warm-up");

    const auto [preds, actuals] =
        dwmoe::walk_forward(ensemble, dwmoe::scheme_from_string(args.scheme), samples, warmup,
                            samples.size() - warmup);
    const dwmoe::EvalReport report = dwmoe::make_report(preds, actuals);
    write_file(args.out, dwmoe::emit_report(report, args.format == "json"
                                                        ? dwmoe::ReportFormat::json
                                                        : dwmoe::ReportFormat::csv));
}

struct BenchClassifyArgs {
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    std::size_t n = 200;
    double noise = 0.1;
    std::string out;
};

void run_bench_classify(const BenchClassifyArgs& args) {
    dwmoe::AblationConfig cfg;
    cfg.repetitions = args.reps;
    cfg.seed = args.seed;
    cfg.n_points = args.n;
    cfg.noise_sd = args.noise;
    const dwmoe::AblationResult result = dwmoe::run_classification_ablation(cfg);
    write_file(args.out, dwmoe::write_ablation_table_csv(result));
}

struct BenchForecastArgs {
    std::string config;
    std::string out;
};

void run_bench_forecast(const BenchForecastArgs& args) {
    dwmoe::ExperimentConfig cfg = dwmoe::experiment_config_from_json(load_json_file(args.config));
    if (cfg.csv_path.empty() && !cfg.drift)
        cfg.drift = dwmoe::default_experiment_drift(cfg.seed);
    const dwmoe::ForecastTable table = dwmoe::run_forecast_experiment(cfg);
    write_file(args.out, dwmoe::write_forecast_table_csv(table));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dwmoe: dynamically weighted mixture-of-experts forecasting"};
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    gen_cmd->add_option("--kind", gen.kind, "Dataset kind")
        ->required()
        ->check(CLI::IsMember({"crescents", "drift"}));
    gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->required();
    gen_cmd->add_option("--n", gen.n, "Point count (crescents)");
    gen_cmd->add_option("--noise", gen.noise, "Noise standard deviation (crescents)");
    gen_cmd->add_option("--spec", gen.spec_path, "Drift spec JSON (drift)");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Grow an ensemble on a dataset");
    train_cmd->add_option("--data", train.data, "Input CSV")->required();
    train_cmd->add_option("--config", train.config, "Config JSON")->required();
    train_cmd->add_option("--out", train.out, "Output ensemble JSON")->required();

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Walk-forward prediction report");
    predict_cmd->add_option("--ensemble", predict.ensemble, "Ensemble JSON")->required();
    predict_cmd->add_option("--data", predict.data, "Input CSV")->required();
    predict_cmd->add_option("--scheme", predict.scheme, "Weighting scheme")
        ->check(CLI::IsMember({"unweighted", "static", "dynamic"}));
    predict_cmd->add_option("--out", predict.out, "Output report path")->required();
    predict_cmd->add_option("--format", predict.format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}));

    BenchClassifyArgs classify;
    auto* classify_cmd =
        app.add_subcommand("bench-classify", "Four-weighting classification ablation");
    classify_cmd->add_option("--reps", classify.reps, "Repetitions");
    classify_cmd->add_option("--seed", classify.seed, "Random seed");
    classify_cmd->add_option("--n", classify.n, "Points per repetition");
    classify_cmd->add_option("--noise", classify.noise, "Noise standard deviation");
    classify_cmd->add_option("--out", classify.out, "Output table CSV")->required();

    BenchForecastArgs forecast;
    auto* forecast_cmd = app.add_subcommand("bench-forecast", "Weighting scheme comparison");
    forecast_cmd->add_option("--config", forecast.config, "Config JSON")->required();
    forecast_cmd->add_option("--out", forecast.out, "Output table CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen_cmd->parsed()) run_gen_data(gen);
        if (train_cmd->parsed()) run_train(train);
        if (predict_cmd->parsed()) run_predict(predict);
        if (classify_cmd->parsed()) run_bench_classify(classify);
        if (forecast_cmd->parsed()) run_bench_forecast(forecast);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
