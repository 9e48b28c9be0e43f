#include "lfshield/defense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lfshield/errors.hpp"
#include "lfshield/parallel.hpp"
#include "lfshield/simd/distance.hpp"

namespace lfshield {

std::vector<std::size_t> default_k_candidates() {
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= 39; k += 2) ks.push_back(k);
    return ks;
}

NeighborIndex::NeighborIndex(const LabeledDataset& reference)
    : dim_(reference.dim()), columns_(reference.size() * reference.dim()), labels_(reference.labels) {
    if (reference.features.rows() != reference.size()) throw InvariantError("reference rows != labels");
    const std::size_t n = reference.size();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t d = 0; d < dim_; ++d) columns_[d * n + r] = reference.features(r, d);
}

std::vector<double> NeighborIndex::distances(std::span<const double> query) const {
    if (query.size() != dim_)
        throw DimensionError("query has " + std::to_string(query.size()) + " features, reference has " +
                             std::to_string(dim_));
    std::vector<double> out(size());
    simd::squared_distances(columns_, query, out);
    for (double& d : out) d = std::sqrt(d);
    return out;
}

std::vector<std::size_t> NeighborIndex::nearest(std::span<const double> query, std::size_t k,
                                                std::optional<std::size_t> skip) const {
    const std::size_t eligible = size() - (skip && *skip < size() ? 1 : 0);
    if (k == 0 || k > eligible)
        throw KError("K=" + std::to_string(k) + " outside [1, " + std::to_string(eligible) + "]");
    const auto dist = distances(query);

    std::vector<std::size_t> rows;
    rows.reserve(eligible);
    for (std::size_t r = 0; r < size(); ++r)
        if (!skip || r != *skip) rows.push_back(r);
    const auto closer = [&dist](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end(), closer);
    rows.resize(k);
    return rows;
}

Label NeighborIndex::vote(std::span<const std::size_t> rows) const {
    std::size_t ones = 0;
    for (auto r : rows) ones += labels_[r] == Label::Malicious ? 1 : 0;
    return 2 * ones > rows.size() ? Label::Malicious : Label::Benign;
}

Label NeighborIndex::predict(std::span<const double> query, std::size_t k, std::optional<std::size_t> skip) const {
    if (k % 2 == 0) throw KError("K must be odd, got " + std::to_string(k));
    return vote(nearest(query, k, skip));
}

Label knn_predict(const LabeledDataset& reference, std::size_t query_index, std::size_t k, bool exclude_self) {
    if (query_index >= reference.size()) throw ArgError("query row out of range");
    const NeighborIndex index(reference);
    return index.predict(reference.features.row(query_index), k,
                         exclude_self ? std::optional<std::size_t>(query_index) : std::nullopt);
}

Label knn_predict(const LabeledDataset& reference, std::span<const double> query, std::size_t k) {
    return NeighborIndex(reference).predict(query, k);
}

namespace {

void require_same_rows(const LabeledDataset& reference, const LabeledDataset& untrusted) {
    if (reference.size() != untrusted.size() || reference.dim() != untrusted.dim())
        throw DimensionError("reference and untrusted datasets differ in shape");
    if (reference.features != untrusted.features)
        throw DimensionError("reference and untrusted datasets must share the same feature rows");
}

void require_odd_candidates(const std::vector<std::size_t>& ks) {
    if (ks.empty()) throw KError("no K candidates");
    for (auto k : ks)
        if (k == 0 || k % 2 == 0) throw KError("K candidates must be odd and >= 1, got " + std::to_string(k));
}

DefenseResult compare_and_restore(const LabeledDataset& untrusted, const std::vector<Label>& predicted, std::size_t k) {
    DefenseResult out;
    out.k_used = k;
    std::vector<Label> labels = untrusted.labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predicted[i] != labels[i]) {
            out.alarms.push_back({i, labels[i], predicted[i]});
            labels[i] = predicted[i];
        }
    }
    out.mismatch_count = out.alarms.size();
    out.recovered = untrusted.with_labels(std::move(labels));
    out.recovered.id = untrusted.id + "/recovered";
    return out;
}

}  // namespace

KSearchTrace search_k(const LabeledDataset& reference, const LabeledDataset& untrusted, const KSearchConfig& cfg,
                      unsigned threads) {
    require_same_rows(reference, untrusted);
    require_odd_candidates(cfg.candidates);
    std::vector<std::size_t> ks = cfg.candidates;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    const std::size_t n = reference.size();
    const std::size_t eligible = n - (cfg.exclude_self && n > 0 ? 1 : 0);
    // Neighbour lists are computed once at the largest usable K; the first
    // K entries of that list are exactly the K nearest.
    std::size_t depth = 0;
    for (auto k : ks)
        if (k <= eligible) depth = std::max(depth, k);

    const NeighborIndex index(reference);
    std::vector<std::vector<std::size_t>> neighbors(n);
    if (depth > 0) {
        parallel_for(n, threads, [&](std::size_t i) {
            neighbors[i] = index.nearest(reference.features.row(i), depth,
                                         cfg.exclude_self ? std::optional<std::size_t>(i) : std::nullopt);
        });
    }

    KSearchTrace trace;
    std::optional<std::pair<std::size_t, std::size_t>> best;  // (K, L_m)
    for (auto k : ks) {
        if (k > eligible)
            throw KError("K=" + std::to_string(k) + " exceeds the " + std::to_string(eligible) + " available neighbours");
        std::size_t mismatches = 0;
        for (std::size_t i = 0; i < n; ++i)
            mismatches += index.vote(std::span(neighbors[i]).first(k)) != reference.labels[i] ? 1 : 0;
        trace.mismatches.emplace_back(k, mismatches);
        if (!best || mismatches < best->second) best = {k, mismatches};
        if (mismatches == 0) break;
    }
    trace.k = best->first;
    return trace;
}

std::size_t choose_k(const LabeledDataset& reference, const LabeledDataset& untrusted, const KSearchConfig& cfg,
                     unsigned threads) {
    return search_k(reference, untrusted, cfg, threads).k;
}

DefenseResult sanitize(const LabeledDataset& reference, const LabeledDataset& untrusted, std::size_t k,
                       bool exclude_self, unsigned threads) {
    require_same_rows(reference, untrusted);
    if (k % 2 == 0) throw KError("K must be odd, got " + std::to_string(k));
    const NeighborIndex index(reference);
    std::vector<Label> predicted(untrusted.size());
    parallel_for(untrusted.size(), threads, [&](std::size_t i) {
        predicted[i] = index.predict(reference.features.row(i), k,
                                     exclude_self ? std::optional<std::size_t>(i) : std::nullopt);
    });
    return compare_and_restore(untrusted, predicted, k);
}

DefenseResult sanitize_with_trusted(const LabeledDataset& trusted, const LabeledDataset& untrusted, std::size_t k,
                                    unsigned threads) {
    if (trusted.dim() != untrusted.dim()) throw DimensionError("trusted and untrusted feature dimensions differ");
    if (k % 2 == 0) throw KError("K must be odd, got " + std::to_string(k));
    const NeighborIndex index(trusted);
    std::vector<Label> predicted(untrusted.size());
    parallel_for(untrusted.size(), threads,
                 [&](std::size_t i) { predicted[i] = index.predict(untrusted.features.row(i), k); });
    return compare_and_restore(untrusted, predicted, k);
}

void write_alarm_csv(const std::vector<Alarm>& alarms, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "index,old_label,predicted_label\n";
    for (const auto& a : alarms) out << a.index << ',' << as_int(a.old_label) << ',' << as_int(a.predicted) << '\n';
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

void write_alarm_log(const std::vector<Alarm>& alarms, std::ostream& out) {
    for (const auto& a : alarms)
        out << "LF attack suspected at row " << a.index << ": label " << as_int(a.old_label) << " restored to "
            << as_int(a.predicted) << '\n';
}

}  // namespace lfshield
