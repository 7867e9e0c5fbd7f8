#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dwmoe/json_io.hpp"
#include "dwmoe/mlp.hpp"

using namespace dwmoe;

namespace {

// Independent forward oracle built on tanh instead of the logistic
// function: 2*sigma(a) - 1 == tanh(a/2) and 0.4*sigma(b) - 0.2 == 0.2*tanh(b/2).
double forward_oracle(const MlpExpert& e, const std::vector<double>& x) {
    double b = e.w_ho[e.n_hidden];
    for (std::size_t j = 0; j < e.n_hidden; ++j) {
        double a = e.w_ih[e.n_inputs * e.n_hidden + j];
        for (std::size_t f = 0; f < e.n_inputs; ++f) a += x[f] * e.w_ih[f * e.n_hidden + j];
        b += e.w_ho[j] * std::tanh(a / 2.0);
    }
    return 0.2 * std::tanh(b / 2.0);
}

std::vector<Sample> random_samples(std::size_t n, std::size_t f, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    std::vector<Sample> samples(n);
    for (auto& s : samples) {
        s.x.resize(f);
        for (auto& v : s.x) v = rng.uniform(-0.1, 0.1);
        s.t = rng.uniform(-0.15, 0.15);
    }
    return samples;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("init_random is deterministic and correctly sized") {
    const auto a = init_random(6, 2, 123);
    const auto b = init_random(6, 2, 123);
    CHECK(a == b);
    CHECK(a.w_ih.size() == 14);
    CHECK(a.w_ho.size() == 3);
    CHECK(a.weight_count() == 17);
    for (double w : a.w_ih) {
        CHECK(w >= -0.5);
        CHECK(w <= 0.5);
    }
    CHECK(init_random(6, 2, 124) != a);
    CHECK_THROWS_AS(init_random(0, 2, 1), std::invalid_argument);
}

TEST_CASE("init_random weights have near-zero empirical mean") {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 600; ++seed) {
        const auto e = init_random(6, 2, seed);
        for (double w : e.w_ih) sum += w;
        for (double w : e.w_ho) sum += w;
        count += e.weight_count();
    }
    REQUIRE(count >= 10000);
    CHECK(std::abs(sum / static_cast<double>(count)) < 0.02);
}

TEST_CASE("forward of the all-zero expert is exactly zero") {
    MlpExpert e;
    e.n_inputs = 6;
    e.n_hidden = 2;
    e.w_ih.assign(14, 0.0);
    e.w_ho.assign(3, 0.0);
    const std::vector<double> x = {0.1, -0.2, 0.3, 0.0, 0.05, -0.01};
    CHECK(e.forward(x) == 0.0);
}

TEST_CASE("forward stays strictly inside (-0.2, 0.2)") {
    Xoshiro256pp rng(77);
    for (int trial = 0; trial < 2000; ++trial) {
        MlpExpert e;
        e.n_inputs = 4;
        e.n_hidden = 3;
        e.w_ih.resize(15);
        e.w_ho.resize(4);
        for (auto& w : e.w_ih) w = rng.uniform(-20.0, 20.0);
        for (auto& w : e.w_ho) w = rng.uniform(-20.0, 20.0);
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        const double y = e.forward(x);
        CHECK(y > -0.2);
        CHECK(y < 0.2);
    }
}

TEST_CASE("forward matches the independent tanh oracle") {
    Xoshiro256pp rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        MlpExpert e = init_random(6, 2, 1000 + trial);
        std::vector<double> x(6);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        CHECK(e.forward(x) == doctest::Approx(forward_oracle(e, x)).epsilon(1e-12));
    }
}

TEST_CASE("mse of a perfect predictor is zero, hand value checks out") {
    MlpExpert e = init_random(3, 2, 5);
    auto samples = random_samples(10, 3, 6);
    for (auto& s : samples) s.t = e.forward(s.x);
    CHECK(mse(e, samples) == 0.0);

    MlpExpert zero;
    zero.n_inputs = 3;
    zero.n_hidden = 2;
    zero.w_ih.assign(8, 0.0);
    zero.w_ho.assign(3, 0.0);
    const std::vector<Sample> one = {{{0.0, 0.0, 0.0}, 0.1}};
    CHECK(mse(zero, one) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK_THROWS_AS(mse(zero, std::vector<Sample>{}), std::invalid_argument);
}

TEST_CASE("mse is invariant under sample permutation") {
    const MlpExpert e = init_random(4, 2, 8);
    auto samples = random_samples(30, 4, 9);
    const double before = mse(e, samples);
    std::mt19937 rng(10);
    std::shuffle(samples.begin(), samples.end(), rng);
    CHECK(mse(e, samples) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("train_mcmc with zero epochs returns the expert unchanged") {
    const MlpExpert e = init_random(6, 2, 20);
    const auto samples = random_samples(15, 6, 21);
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK(train_mcmc(e, samples, cfg) == e);
}

TEST_CASE("train_mcmc never increases training MSE and is deterministic") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MlpExpert e = init_random(6, 2, derive_seed(40, seed));
        const auto samples = random_samples(12, 6, derive_seed(41, seed));
        TrainConfig cfg;
        cfg.epochs = 15;
        cfg.seed = derive_seed(42, seed);
        const auto trained = train_mcmc(e, samples, cfg);
        CHECK(mse(trained, samples) <= mse(e, samples));
        CHECK(train_mcmc(e, samples, cfg) == trained);
    }
}

TEST_CASE("train_mcmc converges on a constant-target problem") {
    // 200 epochs on 20 samples with constant target 0.05 should cut the MSE
    // to below a quarter of its starting value in at least 9 of 10 seeds.
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto samples = random_samples(20, 6, derive_seed(50, seed));
        for (auto& s : samples) s.t = 0.05;
        const MlpExpert e = init_random(6, 2, derive_seed(51, seed));
        TrainConfig cfg;
        cfg.epochs = 200;
        cfg.seed = derive_seed(52, seed);
        const auto trained = train_mcmc(e, samples, cfg);
        if (mse(trained, samples) < 0.25 * mse(e, samples)) ++improved;
    }
    CHECK(improved >= 9);
}

TEST_CASE("metropolis acceptance is available and deterministic") {
    const MlpExpert e = init_random(6, 2, 60);
    const auto samples = random_samples(10, 6, 61);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 62;
    cfg.metropolis_temperature = 0.01;
    const auto a = train_mcmc(e, samples, cfg);
    const auto b = train_mcmc(e, samples, cfg);
    CHECK(a == b);
}

TEST_CASE("expert JSON round-trip is bit-exact") {
    const MlpExpert e = init_random(6, 2, 70);
    const auto j = json::parse(to_json(e).dump());
    const MlpExpert back = expert_from_json(j);
    CHECK(back == e);
}

}  // TEST_SUITE
