#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "lfshield/dataset.hpp"

namespace lfshield {

// Positive class is label 1 (malicious).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

// A rate is nullopt when its denominator is zero.
struct MetricsReport {
    std::optional<double> tpr;
    std::optional<double> tnr;
    std::optional<double> fpr;
    std::optional<double> fnr;
    double accuracy = 0.0;
    std::optional<double> asr;  // attack runs only
};

/// Throws LengthError on unequal or empty inputs.
ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> truth);

/// Throws EmptyMatrixError when the matrix holds no samples.
MetricsReport rates(const ConfusionMatrix& cm);

}  // namespace lfshield
