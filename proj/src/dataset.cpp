#include "lfshield/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "lfshield/csv.hpp"
#include "lfshield/errors.hpp"
#include "lfshield/seeding.hpp"

namespace lfshield {

Label label_from_int(long long value) {
    if (value != 0 && value != 1) throw LabelError("label " + std::to_string(value) + " is not 0 or 1");
    return static_cast<Label>(value);
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw DimensionError("matrix data size does not match shape");
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

void FeatureMatrix::set_column(std::size_t j, std::span<const double> values) {
    if (values.size() != rows_) throw DimensionError("column length does not match row count");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    FeatureMatrix out(indices.size(), cols_);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = row(indices[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

void LabeledDataset::validate() const {
    if (features.rows() != labels.size())
        throw InvariantError("dataset '" + id + "': feature rows != label count");
    if (!records.empty() && records.size() != labels.size())
        throw InvariantError("dataset '" + id + "': record count != label count");
    for (double v : features.data())
        if (!std::isfinite(v)) throw InvariantError("dataset '" + id + "': non-finite feature value");
    for (Label l : labels)
        if (l != Label::Benign && l != Label::Malicious) throw InvariantError("dataset '" + id + "': bad label");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices, std::string new_id) const {
    LabeledDataset out;
    out.id = std::move(new_id);
    out.features = features.select_rows(indices);
    out.labels.reserve(indices.size());
    for (auto i : indices) out.labels.push_back(labels[i]);
    if (!records.empty()) {
        out.records.reserve(indices.size());
        for (auto i : indices) out.records.push_back(records[i]);
    }
    return out;
}

LabeledDataset LabeledDataset::with_labels(std::vector<Label> new_labels) const {
    if (new_labels.size() != labels.size()) throw LengthError("replacement label vector has wrong length");
    LabeledDataset out = *this;
    out.labels = std::move(new_labels);
    for (std::size_t i = 0; i < out.records.size(); ++i) out.records[i].label = out.labels[i];
    return out;
}

std::vector<UrlRecord> load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("'" + path.string() + "': missing header `url,label`");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto header = csv::split_line(line);
    if (!header || header->size() != 2 || csv::trim((*header)[0]) != "url" || csv::trim((*header)[1]) != "label")
        throw SchemaError("'" + path.string() + "': header must be `url,label`");

    std::vector<UrlRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const std::string where = "'" + path.string() + "' line " + std::to_string(line_no);
        const auto fields = csv::split_line(line);
        if (!fields || fields->size() != 2) throw SchemaError(where + ": expected 2 fields");
        const auto url = csv::trim((*fields)[0]);
        if (url.empty()) throw SchemaError(where + ": empty URL");
        const auto value = csv::parse_integer((*fields)[1]);
        if (!value || (*value != 0 && *value != 1))
            throw LabelError(where + ": label '" + std::string(csv::trim((*fields)[1])) + "' is not 0 or 1");
        records.push_back({std::string(url), static_cast<Label>(*value)});
    }
    if (in.bad()) throw IoError("read error on '" + path.string() + "'");
    return records;
}

double quantile_linear(std::span<const double> sorted, double q) {
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> iqr_rescale(std::span<const double> column) {
    std::vector<double> out(column.size(), 0.0);
    if (column.empty()) return out;
    std::vector<double> sorted(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile_linear(sorted, 0.25);
    const double q3 = quantile_linear(sorted, 0.75);
    const double iqr = q3 - q1;
    if (!(iqr > 0.0)) return out;
    const double median = quantile_linear(sorted, 0.5);
    for (std::size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - median) / iqr;
    return out;
}

LabeledDataset preprocess(const std::vector<UrlRecord>& records, const PreprocessConfig& cfg) {
    if (records.empty()) throw EmptyAfterCleaning("no records to preprocess");

    struct Kept {
        UrlRecord record;
        FeatureVector features;
    };
    std::vector<Kept> kept;
    std::unordered_set<std::string> seen_urls;
    std::unordered_set<std::string> seen_hosts;
    for (const auto& rec : records) {
        const std::string url(csv::trim(rec.raw));
        if (url.empty() || !seen_urls.insert(url).second) continue;
        UrlParts parts;
        try {
            parts = parse_url(url);
        } catch (const MalformedUrl&) {
            continue;
        }
        if (cfg.dedup_hostnames && !seen_hosts.insert(parts.hostname).second) continue;
        kept.push_back({{url, rec.label}, extract_features(url)});
    }
    if (kept.empty()) throw EmptyAfterCleaning("every record was removed during cleaning");

    std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) { return a.record.raw < b.record.raw; });
    Engine rng(cfg.seed);
    seeded_shuffle(kept.begin(), kept.end(), rng);

    LabeledDataset ds;
    ds.id = "preprocessed";
    ds.features = FeatureMatrix(kept.size(), kFeatureCount);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        std::copy(kept[i].features.begin(), kept[i].features.end(), ds.features.row(i).begin());
        ds.labels.push_back(kept[i].record.label);
        ds.records.push_back(std::move(kept[i].record));
    }
    if (cfg.scale) {
        for (std::size_t j = 0; j < kFeatureCount; ++j) ds.features.set_column(j, iqr_rescale(ds.features.column(j)));
    }
    ds.validate();
    return ds;
}

std::size_t floor_fraction(double rate, std::size_t n) {
    const double x = rate * static_cast<double>(n);
    return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

std::size_t ceil_fraction(double rate, std::size_t n) {
    const double x = rate * static_cast<double>(n);
    return static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9 * std::max(1.0, x))));
}

SplitDataset split(const LabeledDataset& ds, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw RatioError("split ratio must lie in (0, 1)");
    if (ds.size() < 2) throw ArgError("cannot split a dataset with fewer than 2 rows");

    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Engine rng(seed);
    seeded_shuffle(perm.begin(), perm.end(), rng);

    const std::size_t n_train = floor_fraction(ratio, ds.size());
    SplitDataset out;
    out.ratio = ratio;
    out.seed = seed;
    out.train_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    out.train = ds.subset(out.train_indices, ds.id + "/train");
    out.test = ds.subset(out.test_indices, ds.id + "/test");
    return out;
}

LabeledDataset generate_synthetic(std::size_t n, double class_separation, std::uint64_t seed) {
    if (n < 2) throw ArgError("synthetic dataset needs n >= 2");
    if (!(class_separation > 0.0) || !std::isfinite(class_separation))
        throw ArgError("class separation must be a positive finite number");

    const std::size_t n_benign = n / 2;
    std::vector<Label> labels(n, Label::Malicious);
    std::fill_n(labels.begin(), n_benign, Label::Benign);
    Engine rng(seed);
    seeded_shuffle(labels.begin(), labels.end(), rng);

    LabeledDataset ds;
    std::ostringstream id;
    id << "synthetic-n" << n << "-sep" << csv::format_double(class_separation) << "-seed" << seed;
    ds.id = id.str();
    ds.features = FeatureMatrix(n, kFeatureCount);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = (labels[i] == Label::Benign ? -0.5 : 0.5) * class_separation;
        for (double& x : ds.features.row(i)) x = mean + standard_normal(rng);
    }
    ds.labels = std::move(labels);
    return ds;
}

void write_feature_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << (j + 1) << ',';
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.features.row(i)) out << csv::format_double(v) << ',';
        out << as_int(ds.labels[i]) << '\n';
    }
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

LabeledDataset read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("'" + path.string() + "': missing header");
    const auto header = csv::split_line(line);
    if (!header || header->size() < 2 || csv::trim(header->back()) != "label")
        throw SchemaError("'" + path.string() + "': header must be `f1,...,fn,label`");
    const std::size_t dim = header->size() - 1;
    for (std::size_t j = 0; j < dim; ++j)
        if (csv::trim((*header)[j]) != "f" + std::to_string(j + 1))
            throw SchemaError("'" + path.string() + "': header column " + std::to_string(j + 1) + " must be f" +
                              std::to_string(j + 1));

    std::vector<double> values;
    std::vector<Label> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const std::string where = "'" + path.string() + "' line " + std::to_string(line_no);
        const auto fields = csv::split_line(line);
        if (!fields || fields->size() != dim + 1)
            throw SchemaError(where + ": expected " + std::to_string(dim + 1) + " fields");
        for (std::size_t j = 0; j < dim; ++j) {
            const auto v = csv::parse_double((*fields)[j]);
            if (!v) throw SchemaError(where + ": bad number '" + (*fields)[j] + "'");
            values.push_back(*v);
        }
        const auto lab = csv::parse_integer(fields->back());
        if (!lab || (*lab != 0 && *lab != 1)) throw LabelError(where + ": label is not 0 or 1");
        labels.push_back(static_cast<Label>(*lab));
    }
    LabeledDataset ds;
    ds.id = path.stem().string();
    ds.features = FeatureMatrix(labels.size(), dim, std::move(values));
    ds.labels = std::move(labels);
    return ds;
}

}  // namespace lfshield
