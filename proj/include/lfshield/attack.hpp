#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lfshield/dataset.hpp"
#include "lfshield/forest.hpp"

namespace lfshield {

struct AttackResult {
    LabeledDataset poisoned;
    std::vector<std::size_t> flipped_indices;  // sorted, distinct
    double rate = 0.0;
    std::uint64_t seed = 0;
};

/// Random label flipping: ceil(rate * N) distinct rows, drawn uniformly
/// without replacement regardless of class, get their label inverted.
/// Features are untouched. Throws RateError unless 0 <= rate <= 1.
AttackResult flip_labels(const LabeledDataset& train, double rate, std::uint64_t seed);

/// Flips exactly `indices` (must be distinct and in range).
LabeledDataset apply_flips(const LabeledDataset& ds, const std::vector<std::size_t>& indices);

/// Attack success rate: accuracy of the model against the complemented test
/// labels, i.e. 1 - clean test accuracy.
double asr(const ForestModel& model, const LabeledDataset& test);

/// One-column CSV `index` for audit.
void write_flip_indices(const std::vector<std::size_t>& indices, const std::filesystem::path& path);
std::vector<std::size_t> read_flip_indices(const std::filesystem::path& path);

}  // namespace lfshield
