#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lfshield/url_features.hpp"

namespace lfshield {

enum class Label : std::uint8_t { Benign = 0, Malicious = 1 };

constexpr Label flipped(Label l) noexcept { return l == Label::Benign ? Label::Malicious : Label::Benign; }
constexpr int as_int(Label l) noexcept { return static_cast<int>(l); }

/// Throws LabelError unless value is 0 or 1.
Label label_from_int(long long value);

struct UrlRecord {
    std::string raw;
    Label label = Label::Benign;

    bool operator==(const UrlRecord&) const = default;
};

/// Dense row-major matrix of features; one row per sample.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::vector<double> column(std::size_t j) const;
    void set_column(std::size_t j, std::span<const double> values);

    /// Rows picked in the order given by `indices`.
    FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Feature matrix plus binary labels. `records` is either empty (feature-only
/// data) or parallel to the rows.
struct LabeledDataset {
    std::string id;
    std::vector<UrlRecord> records;
    FeatureMatrix features;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return features.cols(); }
    bool empty() const noexcept { return labels.empty(); }

    /// Throws InvariantError if the row counts disagree or a value is not finite.
    void validate() const;

    LabeledDataset subset(std::span<const std::size_t> indices, std::string new_id) const;
    LabeledDataset with_labels(std::vector<Label> new_labels) const;

    bool operator==(const LabeledDataset&) const = default;
};

struct SplitDataset {
    LabeledDataset train;
    LabeledDataset test;
    double ratio = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> train_indices;  // rows of the source dataset
    std::vector<std::size_t> test_indices;
};

struct PreprocessConfig {
    std::uint64_t seed = 0;
    bool scale = true;
    bool dedup_hostnames = true;
};

/// Reads a `url,label` CSV (RFC 4180 quoting). Errors carry the line number.
std::vector<UrlRecord> load_csv(const std::filesystem::path& path);

/// Drops exact-URL duplicates, unparsable URLs and (optionally) repeated
/// hostnames, first occurrence winning; extracts features, IQR-rescales every
/// column and shuffles rows with a seeded permutation. The shuffle starts
/// from URL order, so the output depends only on the surviving URL set and
/// the seed.
LabeledDataset preprocess(const std::vector<UrlRecord>& records, const PreprocessConfig& cfg);

/// Quantile of sorted data by linear interpolation between order statistics.
double quantile_linear(std::span<const double> sorted, double q);

/// (x - median) / (Q3 - Q1), or all zeros when Q3 == Q1.
std::vector<double> iqr_rescale(std::span<const double> column);

/// Seeded permutation, then prefix (train) / suffix (test) split with
/// train.size() == floor(ratio * N).
SplitDataset split(const LabeledDataset& ds, double ratio, std::uint64_t seed);

/// Two unit-variance Gaussian clusters in 16 dimensions with means at
/// -separation/2 (label 0) and +separation/2 (label 1) on every coordinate.
LabeledDataset generate_synthetic(std::size_t n, double class_separation, std::uint64_t seed);

/// Feature CSV with header `f1,...,fn,label`; values round-trip exactly.
void write_feature_csv(const LabeledDataset& ds, const std::filesystem::path& path);
LabeledDataset read_feature_csv(const std::filesystem::path& path);

/// floor/ceil of rate * n that ignores representation error in `rate`
/// (0.05 * 800 is 40.000000000000007 in binary).
std::size_t floor_fraction(double rate, std::size_t n);
std::size_t ceil_fraction(double rate, std::size_t n);

}  // namespace lfshield
