#pragma once

// Evaluation harness: walk-forward scheme comparison on drifting series,
// the four-weighting classification ablation on crescent data, report
// emission, and the experiment configs the CLI consumes.

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dwmoe/data.hpp"
#include "dwmoe/ensemble.hpp"
#include "dwmoe/json_io.hpp"
#include "dwmoe/metrics.hpp"

namespace dwmoe {

// --- reports -----------------------------------------------------------------

struct StepRecord {
    double predicted = 0.0;
    double actual = 0.0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EvalReport {
    double nse = 0.0;
    double direction_accuracy = 0.0;
    std::vector<StepRecord> per_step;
    std::size_t horizon = 0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline EvalReport make_report(std::span<const double> preds, std::span<const double> actuals) {
    EvalReport r;
    r.nse = nse_error(preds, actuals);
    r.direction_accuracy = direction_accuracy(preds, actuals);
    r.horizon = preds.size();
    r.per_step.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i)
        r.per_step.push_back(StepRecord{preds[i], actuals[i]});
    return r;
}

enum class ReportFormat { csv, json };

inline std::string emit_report(const EvalReport& r, ReportFormat format) {
    if (format == ReportFormat::json) {
        json per_step = json::array();
        for (const auto& s : r.per_step) per_step.push_back(json::array({s.predicted, s.actual}));
        const json j{{"nse", r.nse},
                     {"nse_sqrt", std::sqrt(r.nse)},
                     {"direction_accuracy", r.direction_accuracy},
                     {"horizon", r.horizon},
                     {"per_step", per_step}};
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "step,predicted,actual\n";
    for (std::size_t i = 0; i < r.per_step.size(); ++i)
        out << i << ',' << detail::format_double(r.per_step[i].predicted) << ','
            << detail::format_double(r.per_step[i].actual) << '\n';
    out << "nse," << detail::format_double(r.nse) << '\n';
    out << "direction_accuracy," << detail::format_double(r.direction_accuracy) << '\n';
    return out.str();
}

inline EvalReport parse_report_json(const std::string& text) {
    const json j = json::parse(text);
    EvalReport r;
    r.nse = j.at("nse").get<double>();
    r.direction_accuracy = j.at("direction_accuracy").get<double>();
    r.horizon = j.at("horizon").get<std::size_t>();
    for (const auto& s : j.at("per_step"))
        r.per_step.push_back(StepRecord{s.at(0).get<double>(), s.at(1).get<double>()});
    return r;
}

inline EvalReport parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "step,predicted,actual")
        throw CsvError("bad report header", 1);
    EvalReport r;
    int line_no = 1;
    bool got_nse = false, got_dir = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        double v;
        if (fields[0] == "nse" && fields.size() == 2) {
            if (!detail::parse_double(detail::trim(fields[1]), v))
                throw CsvError("malformed value", line_no);
            r.nse = v;
            got_nse = true;
        } else if (fields[0] == "direction_accuracy" && fields.size() == 2) {
            if (!detail::parse_double(detail::trim(fields[1]), v))
                throw CsvError("malformed value", line_no);
            r.direction_accuracy = v;
            got_dir = true;
        } else if (fields.size() == 3) {
            StepRecord s;
            if (!detail::parse_double(detail::trim(fields[1]), s.predicted) ||
                !detail::parse_double(detail::trim(fields[2]), s.actual))
                throw CsvError("malformed value", line_no);
            r.per_step.push_back(s);
        } else {
            throw CsvError("malformed row", line_no);
        }
    }
    if (!got_nse || !got_dir) throw CsvError("missing summary rows", line_no);
    r.horizon = r.per_step.size();
    return r;
}

// --- walk-forward evaluation ---------------------------------------------------

// Run one scheme over a continuation: warm-up steps update state without
// being scored, then `horizon` steps are predicted before their target is
// revealed. The static scheme runs dynamically through warm-up and freezes
// at its end.
inline std::pair<std::vector<double>, std::vector<double>> walk_forward(
    const Ensemble& grown, Scheme scheme, std::span<const Sample> continuation,
    std::size_t warmup, std::size_t horizon) {
    if (continuation.size() < warmup + horizon)
        throw std::invalid_argument("walk_forward: insufficient data");
    if (scheme == Scheme::static_weights && warmup == 0)
        throw std::invalid_argument("walk_forward: static scheme requires warm-up");

    Ensemble e = grown.with_scheme(scheme == Scheme::unweighted ? Scheme::unweighted
                                                                : Scheme::dynamic_weights);
    std::vector<double> preds, actuals;
    preds.reserve(horizon);
    actuals.reserve(horizon);
    for (std::size_t i = 0; i < warmup + horizon; ++i) {
        const Sample& s = continuation[i];
        if (i >= warmup) {
            preds.push_back(e.predict(s.x));
            actuals.push_back(s.t);
        }
        e.observe(s.x, s.t);
        if (scheme == Scheme::static_weights && i + 1 == warmup) e.freeze_static();
    }
    return {std::move(preds), std::move(actuals)};
}

// --- forecasting experiment ------------------------------------------------------

struct EnsembleConfig {
    double lambda = 0.7;
    std::size_t window = 10;
};

struct ExperimentConfig {
    std::string csv_path;            // one of csv_path / drift must be set
    std::optional<DriftSpec> drift;
    std::size_t target_feature = 0;  // raw-price CSVs only
    std::vector<std::size_t> region_features = {3, 5};
    std::vector<std::size_t> horizons = {4, 10, 20};
    std::vector<Scheme> schemes = {Scheme::unweighted, Scheme::static_weights,
                                   Scheme::dynamic_weights};
    std::size_t repetitions = 10;
    std::size_t train_len = 100;
    GrowthConfig growth;
    TrainConfig train;
    EnsembleConfig ensemble;
    std::uint64_t seed = 0;
};

struct ForecastCell {
    double nse = 0.0;
    double direction_accuracy = 0.0;
};

struct ForecastTable {
    std::vector<Scheme> schemes;
    std::vector<std::size_t> horizons;
    std::vector<std::vector<ForecastCell>> cells;  // [scheme][horizon]

    const ForecastCell& cell(Scheme s, std::size_t horizon) const {
        for (std::size_t i = 0; i < schemes.size(); ++i)
            for (std::size_t j = 0; j < horizons.size(); ++j)
                if (schemes[i] == s && horizons[j] == horizon) return cells[i][j];
        throw std::out_of_range("ForecastTable::cell: no such entry");
    }
};

inline std::vector<Sample> samples_from_drift(const DriftSeries& ds) {
    std::vector<Sample> samples;
    samples.reserve(ds.targets.size());
    for (std::size_t w = 0; w < ds.targets.size(); ++w)
        samples.push_back(Sample{ds.features.weeks[w].changes, ds.targets[w]});
    return samples;
}

// Load samples from either CSV flavor: the change format is used directly,
// a raw price file goes through weekly averaging and percent changes.
inline std::vector<Sample> load_samples_file(const std::string& path, std::size_t target_feature) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    if (is_change_csv_header(in)) return samples_from_drift(load_change_csv(in));
    const RawSeries raw = load_csv(in);
    return make_samples(to_percent_changes(weekly_average(raw)), target_feature);
}

inline std::vector<Sample> experiment_samples(const ExperimentConfig& cfg) {
    if (!cfg.csv_path.empty()) return load_samples_file(cfg.csv_path, cfg.target_feature);
    if (!cfg.drift) throw std::invalid_argument("experiment config needs a csv path or a drift spec");
    return samples_from_drift(gen_drifting_series(*cfg.drift));
}

// Grow `repetitions` ensembles on the training prefix and score every
// scheme on the same held-out continuation; cells hold means over
// repetitions.
inline ForecastTable run_forecast_experiment(const ExperimentConfig& cfg) {
    if (cfg.horizons.empty() || cfg.schemes.empty() || cfg.repetitions < 1)
        throw std::invalid_argument("run_forecast_experiment: bad config");
    const std::vector<Sample> samples = experiment_samples(cfg);

    const std::size_t warmup = cfg.ensemble.window;
    std::size_t max_horizon = 0;
    for (std::size_t h : cfg.horizons) max_horizon = std::max(max_horizon, h);
    if (samples.size() < cfg.train_len + warmup + max_horizon)
        throw std::invalid_argument("run_forecast_experiment: insufficient data");

    const Partition partition = zero_line(cfg.region_features);
    const std::span<const Sample> all(samples);
    const auto train = all.first(cfg.train_len);
    const auto continuation = all.subspan(cfg.train_len, warmup + max_horizon);

    ForecastTable table;
    table.schemes = cfg.schemes;
    table.horizons = cfg.horizons;
    table.cells.assign(cfg.schemes.size(), std::vector<ForecastCell>(cfg.horizons.size()));

    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        GrowthConfig g = cfg.growth;
        g.seed = derive_seed(cfg.seed, rep);
        const GrowthResult grown = grow_ensemble(train, partition, g, cfg.train,
                                                 cfg.ensemble.lambda, cfg.ensemble.window);
        for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
            const auto [preds, actuals] =
                walk_forward(grown.ensemble, cfg.schemes[si], continuation, warmup, max_horizon);
            for (std::size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
                const std::size_t h = cfg.horizons[hi];
                const std::span<const double> p(preds.data(), h);
                const std::span<const double> a(actuals.data(), h);
                table.cells[si][hi].nse += nse_error(p, a);
                table.cells[si][hi].direction_accuracy += direction_accuracy(p, a);
            }
        }
    }
    for (auto& row : table.cells)
        for (auto& c : row) {
            c.nse /= static_cast<double>(cfg.repetitions);
            c.direction_accuracy /= static_cast<double>(cfg.repetitions);
        }
    return table;
}

// Scheme rows by horizon columns, one block per metric; nse_sqrt is the
// square root of the mean nse, readable as an average percentage error.
inline std::string write_forecast_table_csv(const ForecastTable& t) {
    std::ostringstream out;
    out << "metric,scheme";
    for (std::size_t h : t.horizons) out << ",h" << h;
    out << '\n';
    const auto block = [&](const std::string& metric, auto value) {
        for (std::size_t si = 0; si < t.schemes.size(); ++si) {
            out << metric << ',' << to_string(t.schemes[si]);
            for (std::size_t hi = 0; hi < t.horizons.size(); ++hi)
                out << ',' << detail::format_double(value(t.cells[si][hi]));
            out << '\n';
        }
    };
    block("nse", [](const ForecastCell& c) { return c.nse; });
    block("nse_sqrt", [](const ForecastCell& c) { return std::sqrt(c.nse); });
    block("direction_accuracy", [](const ForecastCell& c) { return c.direction_accuracy; });
    return out.str();
}

// Pinned synthetic stand-in for the market data: two regimes that disagree
// on the sign of the dominant driver, arranged so the scored test window
// starts in the second regime and swings back to the first.
inline DriftSpec default_drift_spec(std::uint64_t seed);

// Seed stream separating the synthetic data from the experiment's own
// randomness; one experiment seed drives both.
inline constexpr std::uint64_t kDataSeedStream = 0x64617461;

inline DriftSpec default_experiment_drift(std::uint64_t experiment_seed) {
    return default_drift_spec(derive_seed(experiment_seed, kDataSeedStream));
}

inline DriftSpec default_drift_spec(std::uint64_t seed) {
    DriftSpec spec;
    spec.n_weeks = 130;  // 100 training + 10 warm-up + 20 scored weeks
    spec.seed = seed;
    const double noise = 0.015;
    Regime a;
    a.coeffs = {0.0, 2.0, 0.0, 1.1, 0.0, 0.0};
    a.noise_sd = noise;
    Regime b;
    b.coeffs = {0.0, -2.0, 0.0, -1.1, 0.0, 0.0};
    b.noise_sd = noise;
    a.length = 50;
    spec.regimes.push_back(a);
    b.length = 72;  // the flip back lands inside the scored window
    spec.regimes.push_back(b);
    a.length = 8;
    spec.regimes.push_back(a);
    return spec;
}

// --- classification ablation ---------------------------------------------------

struct AblationConfig {
    std::size_t repetitions = 100;
    std::size_t n_points = 200;
    double noise_sd = 0.1;
    std::size_t train_count = 150;
    std::size_t n_experts = 7;
    std::size_t hidden = 2;
    std::size_t expert_subset = 25;  // training points per expert; small
                                     // subsets keep the experts diverse
    std::size_t epochs = 40;
    double proposal_sd = 0.05;
    std::uint64_t seed = 0;
};

struct AblationResult {
    // Mean accuracy for no weights / 1 weight / 2 weights / 4 weights.
    std::array<double, 4> mean_accuracy{};
};

inline constexpr std::array<const char*, 4> kAblationModeNames = {"no_weights", "1_weight",
                                                                  "2_weights", "4_weights"};

// Evaluate the four weighting modes on one train/test split with the given
// experts. Class labels are encoded as targets of -0.1/+0.1 for training
// and +-1 signs for correctness scoring; the ensemble's sign is the class
// decision.
inline std::array<double, 4> classification_round(std::span<const LabeledPoint> train_pts,
                                                  std::span<const LabeledPoint> test_pts,
                                                  std::span<const MlpExpert> experts) {
    if (train_pts.empty() || test_pts.empty() || experts.empty())
        throw std::invalid_argument("classification_round: empty input");
    const std::size_t k = experts.size();

    std::vector<std::vector<double>> train_outs(train_pts.size()), test_outs(test_pts.size());
    for (std::size_t i = 0; i < train_pts.size(); ++i) {
        train_outs[i].reserve(k);
        for (const auto& e : experts) train_outs[i].push_back(e.forward(train_pts[i].x));
    }
    for (std::size_t i = 0; i < test_pts.size(); ++i) {
        test_outs[i].reserve(k);
        for (const auto& e : experts) test_outs[i].push_back(e.forward(test_pts[i].x));
    }

    std::vector<std::array<double, 2>> coords;
    coords.reserve(train_pts.size());
    for (const auto& p : train_pts) coords.push_back(p.x);

    std::array<double, 4> accuracy{};
    for (int mode = 0; mode < 4; ++mode) {
        Partition partition;
        if (mode == 2) partition = from_medians(coords, {0});
        if (mode == 3) partition = from_medians(coords, {0, 1});

        WeightTable weights(k, partition.region_count());
        if (mode > 0) {  // mode 0 leaves all weights at 1
            for (std::size_t i = 0; i < train_pts.size(); ++i) {
                const double sign = train_pts[i].label == 1 ? 1.0 : -1.0;
                static_train_update(weights,
                                    ScoreRecord{partition.region_of(train_pts[i].x),
                                                score_sample(train_outs[i], sign,
                                                             ScoreMode::classification)});
            }
        }

        std::size_t correct = 0;
        for (std::size_t i = 0; i < test_pts.size(); ++i) {
            const std::size_t region = partition.region_of(test_pts[i].x);
            double num = 0.0, den = 0.0;
            for (std::size_t e = 0; e < k; ++e) {
                num += test_outs[i][e] * weights.at(e, region);
                den += weights.at(e, region);
            }
            const int decided = num / den >= 0.0 ? 1 : 0;
            if (decided == test_pts[i].label) ++correct;
        }
        accuracy[mode] = static_cast<double>(correct) / static_cast<double>(test_pts.size());
    }
    return accuracy;
}

inline AblationResult run_classification_ablation(const AblationConfig& cfg) {
    if (cfg.repetitions < 1 || cfg.train_count + 1 > cfg.n_points ||
        cfg.expert_subset > cfg.train_count)
        throw std::invalid_argument("run_classification_ablation: bad config");

    AblationResult result;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, rep);
        auto pts = gen_crescents(cfg.n_points, cfg.noise_sd, derive_seed(rep_seed, 0));

        Xoshiro256pp rng(derive_seed(rep_seed, 1));
        for (std::size_t i = pts.size() - 1; i > 0; --i)
            std::swap(pts[i], pts[rng.uniform_int(i + 1)]);

        const std::span<const LabeledPoint> all(pts);
        const auto train_pts = all.first(cfg.train_count);
        const auto test_pts = all.subspan(cfg.train_count);

        std::vector<Sample> train_samples;
        train_samples.reserve(train_pts.size());
        for (const auto& p : train_pts)
            train_samples.push_back(
                Sample{{p.x[0], p.x[1]}, p.label == 1 ? 0.1 : -0.1});

        std::vector<MlpExpert> experts;
        experts.reserve(cfg.n_experts);
        for (std::size_t e = 0; e < cfg.n_experts; ++e) {
            const std::size_t start = rng.uniform_int(cfg.train_count - cfg.expert_subset + 1);
            TrainConfig tc;
            tc.epochs = cfg.epochs;
            tc.proposal_sd = cfg.proposal_sd;
            tc.seed = derive_seed(rep_seed, 2 * e + 3);
            experts.push_back(
                train_mcmc(init_random(2, cfg.hidden, derive_seed(rep_seed, 2 * e + 2)),
                           std::span<const Sample>(train_samples).subspan(start, cfg.expert_subset),
                           tc));
        }

        const auto accs = classification_round(train_pts, test_pts, experts);
        for (int m = 0; m < 4; ++m) result.mean_accuracy[m] += accs[m];
    }
    for (auto& a : result.mean_accuracy) a /= static_cast<double>(cfg.repetitions);
    return result;
}

inline std::string write_ablation_table_csv(const AblationResult& r) {
    std::ostringstream out;
    out << "test,accuracy\n";
    for (int m = 0; m < 4; ++m)
        out << kAblationModeNames[m] << ',' << detail::format_double(r.mean_accuracy[m]) << '\n';
    return out.str();
}

// --- config files ----------------------------------------------------------------

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("csv")) c.csv_path = j.at("csv").get<std::string>();
    if (j.contains("drift")) c.drift = drift_spec_from_json(j.at("drift"));
    if (j.contains("target_feature")) c.target_feature = j.at("target_feature").get<std::size_t>();
    if (j.contains("region_features"))
        c.region_features = j.at("region_features").get<std::vector<std::size_t>>();
    if (j.contains("horizons")) c.horizons = j.at("horizons").get<std::vector<std::size_t>>();
    if (j.contains("schemes")) {
        c.schemes.clear();
        for (const auto& s : j.at("schemes")) c.schemes.push_back(scheme_from_string(s.get<std::string>()));
    }
    if (j.contains("repetitions")) c.repetitions = j.at("repetitions").get<std::size_t>();
    if (j.contains("train_len")) c.train_len = j.at("train_len").get<std::size_t>();
    if (j.contains("growth")) c.growth = growth_config_from_json(j.at("growth"));
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    if (j.contains("ensemble")) {
        const auto& e = j.at("ensemble");
        if (e.contains("lambda")) c.ensemble.lambda = e.at("lambda").get<double>();
        if (e.contains("window")) c.ensemble.window = e.at("window").get<std::size_t>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace dwmoe
