#pragma once

// A single expert: fixed-topology MLP with one hidden layer, bounded
// activations (hidden in (-1, 1), output in (-0.2, 0.2)), trained by greedy
// random-walk MCMC on mean squared error.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dwmoe/data.hpp"
#include "dwmoe/rng.hpp"

namespace dwmoe {

// Logistic function with the argument clamped to +-36 so the result stays
// strictly inside (0, 1) in double precision even for extreme weights.
inline double sigmoid(double z) {
    if (z > 36.0) z = 36.0;
    if (z < -36.0) z = -36.0;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct MlpExpert {
    std::size_t n_inputs = 6;
    std::size_t n_hidden = 2;
    // Input->hidden weights, row-major (n_inputs + 1) x n_hidden; the last
    // row holds the hidden biases. Hidden->output weights are n_hidden + 1
    // long with the output bias last.
    std::vector<double> w_ih;
    std::vector<double> w_ho;

    std::size_t weight_count() const { return (n_inputs + 1) * n_hidden + n_hidden + 1; }

    bool dims_consistent() const {
        return w_ih.size() == (n_inputs + 1) * n_hidden && w_ho.size() == n_hidden + 1;
    }

    // Network output for input x, strictly inside (-0.2, 0.2).
    double forward(std::span<const double> x) const {
        double b = w_ho[n_hidden];
        for (std::size_t j = 0; j < n_hidden; ++j) {
            double a = w_ih[n_inputs * n_hidden + j];
            for (std::size_t f = 0; f < n_inputs; ++f) a += x[f] * w_ih[f * n_hidden + j];
            b += w_ho[j] * (2.0 * sigmoid(a) - 1.0);
        }
        return 0.4 * sigmoid(b) - 0.2;
    }

    friend bool operator==(const MlpExpert&, const MlpExpert&) = default;
};

// Fresh expert with every weight drawn i.i.d. uniform on [-0.5, 0.5].
// Draw order: w_ih in storage order, then w_ho.
inline MlpExpert init_random(std::size_t n_inputs, std::size_t n_hidden, std::uint64_t seed) {
    if (n_inputs < 1 || n_hidden < 1) throw std::invalid_argument("init_random: need n_inputs, n_hidden >= 1");
    MlpExpert e;
    e.n_inputs = n_inputs;
    e.n_hidden = n_hidden;
    Xoshiro256pp rng(seed);
    e.w_ih.resize((n_inputs + 1) * n_hidden);
    e.w_ho.resize(n_hidden + 1);
    for (auto& w : e.w_ih) w = rng.uniform(-0.5, 0.5);
    for (auto& w : e.w_ho) w = rng.uniform(-0.5, 0.5);
    return e;
}

inline double mse(const MlpExpert& e, std::span<const Sample> samples) {
    if (samples.empty()) throw std::invalid_argument("mse: empty sample set");
    double sum = 0.0;
    for (const auto& s : samples) {
        const double d = e.forward(s.x) - s.t;
        sum += d * d;
    }
    return sum / static_cast<double>(samples.size());
}

struct TrainConfig {
    std::size_t epochs = 10;
    double proposal_sd = 0.05;
    std::uint64_t seed = 0;
    // 0 keeps the greedy rule (accept only strict MSE decreases). A positive
    // temperature switches to Metropolis acceptance with probability
    // exp(-delta_mse / temperature) for uphill moves.
    double metropolis_temperature = 0.0;
};

// Random-walk MCMC training: epochs * |samples| proposals, each perturbing
// every weight jointly by Gaussian noise of the configured step size. Under
// the default greedy rule the returned expert's training MSE never exceeds
// the input expert's.
inline MlpExpert train_mcmc(MlpExpert e, std::span<const Sample> samples, const TrainConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("train_mcmc: empty sample set");
    if (!(cfg.proposal_sd > 0.0)) throw std::invalid_argument("train_mcmc: proposal_sd must be > 0");
    if (!e.dims_consistent()) throw std::invalid_argument("train_mcmc: inconsistent expert dimensions");

    Xoshiro256pp rng(cfg.seed);
    double current = mse(e, samples);
    MlpExpert proposal = e;
    const std::size_t steps = cfg.epochs * samples.size();
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < e.w_ih.size(); ++i)
            proposal.w_ih[i] = e.w_ih[i] + cfg.proposal_sd * rng.normal();
        for (std::size_t i = 0; i < e.w_ho.size(); ++i)
            proposal.w_ho[i] = e.w_ho[i] + cfg.proposal_sd * rng.normal();

        const double candidate = mse(proposal, samples);
        bool accept = candidate < current;
        if (!accept && cfg.metropolis_temperature > 0.0)
            accept = rng.uniform01() < std::exp(-(candidate - current) / cfg.metropolis_temperature);
        if (accept) {
            e = proposal;
            current = candidate;
        }
    }
    return e;
}

}  // namespace dwmoe
