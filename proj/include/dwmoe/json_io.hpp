#pragma once

// JSON wire formats. Doubles round-trip bit-exactly through nlohmann's
// shortest-round-trip formatting, which the ensemble bundle relies on for
// reproducible predictions after reload.

#include <string>
#include <vector>

#include <json.hpp>

#include "dwmoe/data.hpp"
#include "dwmoe/ensemble.hpp"
#include "dwmoe/mlp.hpp"
#include "dwmoe/partition.hpp"

namespace dwmoe {

using nlohmann::json;

// --- expert: {F, H, w_ih (row-major), w_ho} --------------------------------

inline json to_json(const MlpExpert& e) {
    return json{{"F", e.n_inputs}, {"H", e.n_hidden}, {"w_ih", e.w_ih}, {"w_ho", e.w_ho}};
}

inline MlpExpert expert_from_json(const json& j) {
    MlpExpert e;
    e.n_inputs = j.at("F").get<std::size_t>();
    e.n_hidden = j.at("H").get<std::size_t>();
    e.w_ih = j.at("w_ih").get<std::vector<double>>();
    e.w_ho = j.at("w_ho").get<std::vector<double>>();
    if (!e.dims_consistent()) throw std::invalid_argument("expert_from_json: inconsistent dimensions");
    return e;
}

// --- partition: {axes: [{feature, threshold}]} ------------------------------

inline json to_json(const Partition& p) {
    json axes = json::array();
    for (const auto& a : p.axes()) axes.push_back(json{{"feature", a.feature}, {"threshold", a.threshold}});
    return json{{"axes", axes}};
}

inline Partition partition_from_json(const json& j) {
    std::vector<Axis> axes;
    for (const auto& a : j.at("axes"))
        axes.push_back(Axis{a.at("feature").get<std::size_t>(), a.at("threshold").get<double>()});
    return Partition(std::move(axes));
}

// --- ensemble bundle ---------------------------------------------------------

inline json to_json(const Ensemble& e) {
    json experts = json::array();
    for (const auto& x : e.experts()) experts.push_back(to_json(x));
    json history = json::array();
    for (std::size_t age = 0; age < e.history().size(); ++age) {
        const auto& rec = e.history().at_age(age);
        history.push_back(json{{"region", rec.region}, {"multipliers", rec.multipliers}});
    }
    return json{{"experts", experts},
                {"partition", to_json(e.partition())},
                {"scheme", to_string(e.scheme())},
                {"lambda", e.lambda()},
                {"window", e.window()},
                {"weights", e.weights().flat()},
                {"history", history}};
}

inline Ensemble ensemble_from_json(const json& j) {
    std::vector<MlpExpert> experts;
    for (const auto& x : j.at("experts")) experts.push_back(expert_from_json(x));
    Partition partition = partition_from_json(j.at("partition"));
    const Scheme scheme = scheme_from_string(j.at("scheme").get<std::string>());
    const double lambda = j.at("lambda").get<double>();
    const std::size_t window = j.at("window").get<std::size_t>();

    WeightTable weights(experts.size(), partition.region_count());
    weights.flat() = j.at("weights").get<std::vector<double>>();
    if (weights.flat().size() != experts.size() * partition.region_count())
        throw std::invalid_argument("ensemble_from_json: weight table size mismatch");

    // The JSON lists records newest first; re-push oldest first to rebuild
    // the same ring contents.
    const auto& hist = j.at("history");
    ScoreHistory history(window);
    for (auto it = hist.rbegin(); it != hist.rend(); ++it)
        history.push(ScoreRecord{it->at("region").get<std::size_t>(),
                                 it->at("multipliers").get<std::vector<double>>()});

    return Ensemble(std::move(experts), std::move(partition), scheme, lambda, window,
                    std::move(weights), std::move(history));
}

// --- configs -----------------------------------------------------------------

inline TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("proposal_sd")) c.proposal_sd = j.at("proposal_sd").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("metropolis_temperature"))
        c.metropolis_temperature = j.at("metropolis_temperature").get<double>();
    return c;
}

inline json to_json(const TrainConfig& c) {
    return json{{"epochs", c.epochs},
                {"proposal_sd", c.proposal_sd},
                {"seed", c.seed},
                {"metropolis_temperature", c.metropolis_temperature}};
}

inline GrowthConfig growth_config_from_json(const json& j) {
    GrowthConfig c;
    if (j.contains("seed_epochs")) c.seed_epochs = j.at("seed_epochs").get<std::size_t>();
    if (j.contains("candidate_epochs")) c.candidate_epochs = j.at("candidate_epochs").get<std::size_t>();
    if (j.contains("subset_len")) c.subset_len = j.at("subset_len").get<std::size_t>();
    if (j.contains("max_iters")) c.max_iters = j.at("max_iters").get<std::size_t>();
    if (j.contains("patience")) c.patience = j.at("patience").get<std::size_t>();
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline json to_json(const GrowthConfig& c) {
    return json{{"seed_epochs", c.seed_epochs}, {"candidate_epochs", c.candidate_epochs},
                {"subset_len", c.subset_len},   {"max_iters", c.max_iters},
                {"patience", c.patience},       {"hidden", c.hidden},
                {"seed", c.seed}};
}

inline DriftSpec drift_spec_from_json(const json& j) {
    DriftSpec spec;
    spec.n_weeks = j.at("n_weeks").get<std::size_t>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& r : j.at("regimes")) {
        Regime regime;
        regime.length = r.at("length").get<std::size_t>();
        regime.coeffs = r.at("coeffs").get<std::vector<double>>();
        regime.noise_sd = r.at("noise_sd").get<double>();
        spec.regimes.push_back(std::move(regime));
    }
    return spec;
}

inline json to_json(const DriftSpec& spec) {
    json regimes = json::array();
    for (const auto& r : spec.regimes)
        regimes.push_back(json{{"length", r.length}, {"coeffs", r.coeffs}, {"noise_sd", r.noise_sd}});
    return json{{"n_weeks", spec.n_weeks}, {"regimes", regimes}, {"seed", spec.seed}};
}

}  // namespace dwmoe
