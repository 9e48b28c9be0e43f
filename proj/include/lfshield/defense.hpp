#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "lfshield/dataset.hpp"

namespace lfshield {

/// {1, 3, 5, ..., 39}
std::vector<std::size_t> default_k_candidates();

struct KSearchConfig {
    std::vector<std::size_t> candidates = default_k_candidates();  // odd, >= 1
    bool exclude_self = true;
};

struct Alarm {
    std::size_t index = 0;
    Label old_label = Label::Benign;
    Label predicted = Label::Benign;

    bool operator==(const Alarm&) const = default;
};

struct DefenseResult {
    LabeledDataset recovered;
    std::vector<Alarm> alarms;         // ascending index
    std::size_t k_used = 0;
    std::size_t mismatch_count = 0;    // == alarms.size()
};

/// Brute-force K-NN over a fixed reference set. Features are held
/// column-major for the SIMD distance kernels; neighbours are ordered by
/// (Euclidean distance, row index).
class NeighborIndex {
public:
    explicit NeighborIndex(const LabeledDataset& reference);

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return dim_; }

    /// Euclidean distance from `query` to every reference row.
    std::vector<double> distances(std::span<const double> query) const;

    /// The k nearest rows, nearest first, optionally skipping row `skip`.
    /// Throws KError if k is 0 or exceeds the eligible row count.
    std::vector<std::size_t> nearest(std::span<const double> query, std::size_t k,
                                     std::optional<std::size_t> skip = std::nullopt) const;

    /// Majority label of the given rows (callers pass an odd count).
    Label vote(std::span<const std::size_t> rows) const;

    /// Throws KError for even k, DimensionError for a wrong-sized query.
    Label predict(std::span<const double> query, std::size_t k, std::optional<std::size_t> skip = std::nullopt) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> columns_;
    std::vector<Label> labels_;
};

/// Label predicted for reference row `query_index` from its K nearest rows,
/// leaving the row itself out when `exclude_self` is set.
Label knn_predict(const LabeledDataset& reference, std::size_t query_index, std::size_t k, bool exclude_self);
/// Label predicted for an arbitrary feature vector.
Label knn_predict(const LabeledDataset& reference, std::span<const double> query, std::size_t k);

struct KSearchTrace {
    std::size_t k = 0;
    std::vector<std::pair<std::size_t, std::size_t>> mismatches;  // (candidate K, L_m), evaluation order
};

/// Evaluates candidates in ascending order, counting rows whose K-NN label
/// disagrees with the reference label, and stops at the first K with no
/// mismatch. Falls back to the K with fewest mismatches (smallest on ties).
/// `untrusted` must share the reference feature matrix; only its shape is used.
KSearchTrace search_k(const LabeledDataset& reference, const LabeledDataset& untrusted, const KSearchConfig& cfg,
                      unsigned threads = 0);
std::size_t choose_k(const LabeledDataset& reference, const LabeledDataset& untrusted, const KSearchConfig& cfg,
                     unsigned threads = 0);

/// Predicts every row of `untrusted` from `reference` (same features) and
/// restores the predicted label wherever it differs, raising an alarm.
DefenseResult sanitize(const LabeledDataset& reference, const LabeledDataset& untrusted, std::size_t k,
                       bool exclude_self, unsigned threads = 0);

/// Variant for a trusted reference that is only a sample of the data:
/// untrusted rows are queried by feature vector, with no self exclusion.
DefenseResult sanitize_with_trusted(const LabeledDataset& trusted, const LabeledDataset& untrusted, std::size_t k,
                                    unsigned threads = 0);

/// CSV `index,old_label,predicted_label`.
void write_alarm_csv(const std::vector<Alarm>& alarms, const std::filesystem::path& path);
/// One "LF attack suspected at row i ..." line per alarm.
void write_alarm_log(const std::vector<Alarm>& alarms, std::ostream& out);

}  // namespace lfshield
