#pragma once

// Ensemble core: per-expert, per-region voting weights, the weighted-average
// combination rule, multiplicative correctness scoring, the recency-decayed
// dynamic weight recomputation, and greedy error-driven ensemble growth.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwmoe/data.hpp"
#include "dwmoe/metrics.hpp"
#include "dwmoe/mlp.hpp"
#include "dwmoe/partition.hpp"
#include "dwmoe/rng.hpp"

namespace dwmoe {

inline constexpr double kCorrectMultiplier = 1.2;
inline constexpr double kIncorrectMultiplier = 0.4;

// K experts x R regions of strictly positive voting weights; fresh tables
// are all ones.
class WeightTable {
public:
    WeightTable() = default;
    WeightTable(std::size_t n_experts, std::size_t n_regions)
        : n_experts_(n_experts), n_regions_(n_regions), w_(n_experts * n_regions, 1.0) {}

    double at(std::size_t expert, std::size_t region) const { return w_[expert * n_regions_ + region]; }
    double& at(std::size_t expert, std::size_t region) { return w_[expert * n_regions_ + region]; }

    std::size_t n_experts() const { return n_experts_; }
    std::size_t n_regions() const { return n_regions_; }

    const std::vector<double>& flat() const { return w_; }
    std::vector<double>& flat() { return w_; }

    friend bool operator==(const WeightTable&, const WeightTable&) = default;

private:
    std::size_t n_experts_ = 0;
    std::size_t n_regions_ = 0;
    std::vector<double> w_;  // row-major K x R
};

// One scored step: the region the input fell in and each expert's
// correctness multiplier (1.2 or 0.4).
struct ScoreRecord {
    std::size_t region = 0;
    std::vector<double> multipliers;

    friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// Fixed-capacity ring buffer of the most recent score records, age 0 being
// the newest. This window is the only state dynamic reweighting consumes;
// past inputs and expert outputs are not retained.
class ScoreHistory {
public:
    explicit ScoreHistory(std::size_t window = 10) : capacity_(window), buf_(window) {
        if (window == 0) throw std::invalid_argument("ScoreHistory: window must be >= 1");
    }

    void push(ScoreRecord rec) {
        head_ = (head_ + capacity_ - 1) % capacity_;
        buf_[head_] = std::move(rec);
        if (size_ < capacity_) ++size_;
    }

    const ScoreRecord& at_age(std::size_t age) const {
        if (age >= size_) throw std::out_of_range("ScoreHistory: age out of range");
        return buf_[(head_ + age) % capacity_];
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return size_ == 0; }
    void clear() { size_ = 0; head_ = 0; }

private:
    std::size_t capacity_;
    std::vector<ScoreRecord> buf_;
    std::size_t head_ = 0;  // index of the newest record
    std::size_t size_ = 0;
};

enum class ScoreMode { classification, regression };

// Per-expert correctness multipliers for one sample: 1.2 when the expert's
// output direction is right, 0.4 otherwise. Classification targets are the
// class encoded as +-1; regression correctness is sign agreement with the
// near-zero tolerance of direction_correct.
inline std::vector<double> score_sample(std::span<const double> outputs, double target,
                                        ScoreMode mode) {
    std::vector<double> multipliers;
    multipliers.reserve(outputs.size());
    for (double out : outputs) {
        bool correct;
        if (mode == ScoreMode::classification)
            correct = (out > 0.0 && target > 0.0) || (out < 0.0 && target < 0.0);
        else
            correct = direction_correct(out, target);
        multipliers.push_back(correct ? kCorrectMultiplier : kIncorrectMultiplier);
    }
    return multipliers;
}

// Training-time update: multiply the record's region column by the
// multipliers; other regions are untouched.
inline void static_train_update(WeightTable& w, const ScoreRecord& rec) {
    if (rec.multipliers.size() != w.n_experts() || rec.region >= w.n_regions())
        throw std::invalid_argument("static_train_update: record dimensions mismatch");
    for (std::size_t k = 0; k < w.n_experts(); ++k) w.at(k, rec.region) *= rec.multipliers[k];
}

// Recompute the whole weight table from the retained window:
//   w_k(i) = prod over window entries j in region i of multipliers_j[k]^(lambda^j)
// with age j = 0 the newest. Regions absent from the window get the empty
// product, exactly 1, which is how unreinforced weights decay back to 1.
inline WeightTable dynamic_recompute(const ScoreHistory& history, double lambda,
                                     std::size_t n_experts, std::size_t n_regions) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("dynamic_recompute: lambda must be in (0, 1)");
    WeightTable w(n_experts, n_regions);
    double age_factor = 1.0;  // lambda^age
    for (std::size_t age = 0; age < history.size(); ++age, age_factor *= lambda) {
        const ScoreRecord& rec = history.at_age(age);
        if (rec.multipliers.size() != n_experts || rec.region >= n_regions)
            throw std::invalid_argument("dynamic_recompute: record dimensions mismatch");
        for (std::size_t k = 0; k < n_experts; ++k)
            w.at(k, rec.region) *= std::pow(rec.multipliers[k], age_factor);
    }
    return w;
}

enum class Scheme { unweighted, static_weights, dynamic_weights };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::unweighted: return "unweighted";
        case Scheme::static_weights: return "static";
        case Scheme::dynamic_weights: return "dynamic";
    }
    throw std::invalid_argument("unknown scheme");
}

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "unweighted") return Scheme::unweighted;
    if (s == "static") return Scheme::static_weights;
    if (s == "dynamic") return Scheme::dynamic_weights;
    throw std::invalid_argument("unknown scheme '" + s + "'");
}

class Ensemble {
public:
    Ensemble() = default;

    Ensemble(std::vector<MlpExpert> experts, Partition partition, Scheme scheme,
             double lambda = 0.7, std::size_t window = 10)
        : experts_(std::move(experts)),
          partition_(std::move(partition)),
          scheme_(scheme),
          lambda_(lambda),
          window_(window),
          weights_(experts_.size(), partition_.region_count()),
          history_(window) {
        if (experts_.empty()) throw std::invalid_argument("Ensemble: need at least one expert");
        if (!(lambda_ > 0.0 && lambda_ < 1.0))
            throw std::invalid_argument("Ensemble: lambda must be in (0, 1)");
    }

    // Rehydration constructor (deserialization); validates dimensions.
    Ensemble(std::vector<MlpExpert> experts, Partition partition, Scheme scheme, double lambda,
             std::size_t window, WeightTable weights, ScoreHistory history)
        : Ensemble(std::move(experts), std::move(partition), scheme, lambda, window) {
        if (weights.n_experts() != experts_.size() || weights.n_regions() != partition_.region_count())
            throw std::invalid_argument("Ensemble: weight table dimensions mismatch");
        if (history.capacity() != window_)
            throw std::invalid_argument("Ensemble: history window mismatch");
        weights_ = std::move(weights);
        history_ = std::move(history);
    }

    std::size_t size() const { return experts_.size(); }
    std::size_t n_inputs() const { return experts_.front().n_inputs; }

    std::vector<double> expert_outputs(std::span<const double> x) const {
        std::vector<double> out;
        out.reserve(experts_.size());
        for (const auto& e : experts_) out.push_back(e.forward(x));
        return out;
    }

    // Region-weighted vote: y = sum_k f_k(x) w_k(i) / sum_k w_k(i) with i
    // the region of x. This is the whole online prediction step; it mutates
    // nothing.
    double predict(std::span<const double> x) const {
        const std::size_t region = partition_.region_of(x);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < experts_.size(); ++k) {
            const double w = weights_.at(k, region);
            num += experts_[k].forward(x) * w;
            den += w;
        }
        return num / den;
    }

    // Fold one revealed outcome into the state. Only the dynamic scheme
    // reacts: score the experts, push the record, recompute the table from
    // the retained window.
    void observe(std::span<const double> x, double t) {
        if (scheme_ != Scheme::dynamic_weights) return;
        const auto outputs = expert_outputs(x);
        const auto multipliers = score_sample(outputs, t, ScoreMode::regression);
        history_.push(ScoreRecord{partition_.region_of(x), multipliers});
        weights_ = dynamic_recompute(history_, lambda_, experts_.size(), partition_.region_count());
    }

    // Pin the current dynamic weights and stop updating them.
    void freeze_static() {
        if (scheme_ != Scheme::dynamic_weights)
            throw std::logic_error("freeze_static: only a dynamic ensemble can be frozen");
        if (history_.empty()) throw std::logic_error("cannot freeze without warm-up");
        scheme_ = Scheme::static_weights;
    }

    // Copy with the given scheme and fresh state (all-one weights, empty
    // history). Weighting schemes are compared from this common start.
    Ensemble with_scheme(Scheme scheme) const {
        Ensemble e(*this);
        e.scheme_ = scheme;
        e.weights_ = WeightTable(experts_.size(), partition_.region_count());
        e.history_.clear();
        return e;
    }

    const std::vector<MlpExpert>& experts() const { return experts_; }
    const Partition& partition() const { return partition_; }
    Scheme scheme() const { return scheme_; }
    double lambda() const { return lambda_; }
    std::size_t window() const { return window_; }
    const WeightTable& weights() const { return weights_; }
    WeightTable& weights() { return weights_; }
    const ScoreHistory& history() const { return history_; }

private:
    std::vector<MlpExpert> experts_;
    Partition partition_;
    Scheme scheme_ = Scheme::unweighted;
    double lambda_ = 0.7;
    std::size_t window_ = 10;
    WeightTable weights_;
    ScoreHistory history_{10};
};

struct GrowthConfig {
    std::size_t seed_epochs = 10;       // initial expert, full training set
    std::size_t candidate_epochs = 20;  // candidates, contiguous subset
    std::size_t subset_len = 20;
    std::size_t max_iters = 50;
    std::size_t patience = 25;  // consecutive rejections before stopping
    std::size_t hidden = 2;
    std::uint64_t seed = 0;
};

struct GrowthResult {
    Ensemble ensemble;
    // Unweighted training error after the seed expert and after each
    // accepted candidate; non-increasing by construction.
    std::vector<double> error_trace;
    std::size_t candidates_tried = 0;
    std::size_t candidates_accepted = 0;
};

// Grow an ensemble greedily: one seed expert trained briefly on the full
// set, then candidates trained on random contiguous subsets, each kept only
// if it strictly decreases the unweighted error over the full training set.
// The returned ensemble has all-one weights and an empty history.
inline GrowthResult grow_ensemble(std::span<const Sample> train, Partition partition,
                                  const GrowthConfig& gcfg, const TrainConfig& tcfg,
                                  double lambda = 0.7, std::size_t window = 10) {
    if (train.empty()) throw std::invalid_argument("grow_ensemble: empty training set");
    if (gcfg.subset_len < 1 || gcfg.subset_len > train.size())
        throw std::invalid_argument("grow_ensemble: subset_len must be in [1, |train|]");

    const std::size_t n = train.size();
    const std::size_t n_inputs = train[0].x.size();
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = train[i].t;

    TrainConfig seed_cfg = tcfg;
    seed_cfg.epochs = gcfg.seed_epochs;
    seed_cfg.seed = derive_seed(gcfg.seed, 1);
    std::vector<MlpExpert> experts;
    experts.push_back(
        train_mcmc(init_random(n_inputs, gcfg.hidden, derive_seed(gcfg.seed, 0)), train, seed_cfg));

    // Running sum of expert outputs per training sample; the unweighted
    // ensemble prediction is sum / K.
    std::vector<double> output_sums(n);
    for (std::size_t i = 0; i < n; ++i) output_sums[i] = experts[0].forward(train[i].x);

    std::vector<double> preds(n);
    const auto ensemble_error = [&](const std::vector<double>& sums, double k) {
        for (std::size_t i = 0; i < n; ++i) preds[i] = sums[i] / k;
        return nse_error(preds, targets);
    };

    GrowthResult result;
    double error = ensemble_error(output_sums, 1.0);
    result.error_trace.push_back(error);

    Xoshiro256pp subset_rng(derive_seed(gcfg.seed, 2));
    std::vector<double> trial_sums(n);
    std::size_t rejections = 0;
    for (std::size_t iter = 1; iter <= gcfg.max_iters; ++iter) {
        if (rejections >= gcfg.patience) break;
        ++result.candidates_tried;

        const std::size_t start = subset_rng.uniform_int(n - gcfg.subset_len + 1);
        TrainConfig cand_cfg = tcfg;
        cand_cfg.epochs = gcfg.candidate_epochs;
        cand_cfg.seed = derive_seed(gcfg.seed, 2 * iter + 2);
        MlpExpert candidate =
            train_mcmc(init_random(n_inputs, gcfg.hidden, derive_seed(gcfg.seed, 2 * iter + 1)),
                       train.subspan(start, gcfg.subset_len), cand_cfg);

        for (std::size_t i = 0; i < n; ++i)
            trial_sums[i] = output_sums[i] + candidate.forward(train[i].x);
        const double trial_error =
            ensemble_error(trial_sums, static_cast<double>(experts.size() + 1));
        if (trial_error < error) {
            experts.push_back(std::move(candidate));
            output_sums.swap(trial_sums);
            error = trial_error;
            result.error_trace.push_back(error);
            ++result.candidates_accepted;
            rejections = 0;
        } else {
            ++rejections;
        }
    }

    result.ensemble =
        Ensemble(std::move(experts), std::move(partition), Scheme::dynamic_weights, lambda, window);
    return result;
}

}  // namespace dwmoe
