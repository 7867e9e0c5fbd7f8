#pragma once

// Forecast metrics: normalized squared error (plain squared error on zero
// targets, so the all-zero naive predictor scores exactly 1 on non-zero
// targets) and direction accuracy.

#include <cmath>
#include <span>
#include <stdexcept>

namespace dwmoe {

// Sign-agreement correctness with an absolute tolerance at (numerically)
// zero targets. Shared by the weighting multipliers and direction accuracy.
inline bool direction_correct(double pred, double target) {
    if (std::abs(target) <= 1e-6) return std::abs(pred) <= 0.01;
    return (pred > 0.0 && target > 0.0) || (pred < 0.0 && target < 0.0);
}

inline void check_paired(std::span<const double> preds, std::span<const double> targets) {
    if (preds.size() != targets.size())
        throw std::invalid_argument("metrics: preds/targets length mismatch");
    if (preds.empty()) throw std::invalid_argument("metrics: empty input");
}

// Mean of ((y - t) / t)^2, falling back to (y - t)^2 where t == 0.
inline double nse_error(std::span<const double> preds, std::span<const double> targets) {
    check_paired(preds, targets);
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double diff = preds[i] - targets[i];
        const double term = targets[i] == 0.0 ? diff : diff / targets[i];
        sum += term * term;
    }
    return sum / static_cast<double>(preds.size());
}

// Fraction of steps whose predicted change direction matches the actual one.
inline double direction_accuracy(std::span<const double> preds, std::span<const double> targets) {
    check_paired(preds, targets);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (direction_correct(preds[i], targets[i])) ++correct;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace dwmoe
