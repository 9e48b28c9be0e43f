#pragma once

// Test-only reference implementations. These deliberately avoid the library's
// NeighborIndex, SIMD kernels and tree code so they can check them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "lfshield/dataset.hpp"

namespace oracle {

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Full sort of every (distance, row) pair; returns the k-NN majority label.
inline lfshield::Label knn(const lfshield::LabeledDataset& ref, std::span<const double> query, std::size_t k,
                           long skip = -1) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t r = 0; r < ref.size(); ++r) {
        if (static_cast<long>(r) == skip) continue;
        all.emplace_back(euclidean(ref.features.row(r), query), r);
    }
    std::sort(all.begin(), all.end());
    std::size_t ones = 0;
    for (std::size_t i = 0; i < k; ++i) ones += ref.labels[all[i].second] == lfshield::Label::Malicious;
    return 2 * ones > k ? lfshield::Label::Malicious : lfshield::Label::Benign;
}

// Leave-one-out mismatch count for every odd K in `ks`.
inline std::vector<std::size_t> knn_mismatches(const lfshield::LabeledDataset& ref, const std::vector<std::size_t>& ks,
                                               bool exclude_self) {
    std::vector<std::size_t> out;
    for (auto k : ks) {
        std::size_t m = 0;
        for (std::size_t i = 0; i < ref.size(); ++i)
            m += knn(ref, ref.features.row(i), k, exclude_self ? static_cast<long>(i) : -1) != ref.labels[i];
        out.push_back(m);
    }
    return out;
}

// 1-NN accuracy of `test` against `train`.
inline double one_nn_accuracy(const lfshield::LabeledDataset& train, const lfshield::LabeledDataset& test) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) hits += knn(train, test.features.row(i), 1) == test.labels[i];
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

// True when no two rows share identical features with different labels, so
// an unpruned tree can fit the set exactly.
inline bool no_contradictory_duplicates(const lfshield::LabeledDataset& ds) {
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = i + 1; j < ds.size(); ++j)
            if (ds.labels[i] != ds.labels[j] &&
                std::equal(ds.features.row(i).begin(), ds.features.row(i).end(), ds.features.row(j).begin()))
                return false;
    return true;
}

}  // namespace oracle
