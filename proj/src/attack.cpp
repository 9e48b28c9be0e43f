#include "lfshield/attack.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "lfshield/csv.hpp"
#include "lfshield/errors.hpp"
#include "lfshield/seeding.hpp"

namespace lfshield {

AttackResult flip_labels(const LabeledDataset& train, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw RateError("poison rate must lie in [0, 1]");
    const std::size_t n = train.size();
    const std::size_t m = std::min(ceil_fraction(rate, n), n);

    // Partial Fisher-Yates: the first m slots form a uniform m-subset.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Engine rng(seed);
    for (std::size_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + uniform_index(rng, n - i)]);
    pool.resize(m);
    std::sort(pool.begin(), pool.end());

    AttackResult out;
    out.poisoned = apply_flips(train, pool);
    out.poisoned.id = train.id + "/poisoned";
    out.flipped_indices = std::move(pool);
    out.rate = rate;
    out.seed = seed;
    return out;
}

LabeledDataset apply_flips(const LabeledDataset& ds, const std::vector<std::size_t>& indices) {
    std::vector<Label> labels = ds.labels;
    std::vector<bool> seen(labels.size(), false);
    for (auto i : indices) {
        if (i >= labels.size()) throw ArgError("flip index " + std::to_string(i) + " out of range");
        if (seen[i]) throw ArgError("flip index " + std::to_string(i) + " repeated");
        seen[i] = true;
        labels[i] = flipped(labels[i]);
    }
    return ds.with_labels(std::move(labels));
}

double asr(const ForestModel& model, const LabeledDataset& test) {
    if (test.empty()) throw LengthError("ASR needs a non-empty test set");
    std::vector<Label> complemented(test.labels.size());
    std::transform(test.labels.begin(), test.labels.end(), complemented.begin(), flipped);
    return accuracy_against(model, test.features, complemented);
}

void write_flip_indices(const std::vector<std::size_t>& indices, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "index\n";
    for (auto i : indices) out << i << '\n';
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

std::vector<std::size_t> read_flip_indices(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != "index")
        throw SchemaError("'" + path.string() + "': header must be `index`");
    std::vector<std::size_t> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto v = csv::parse_integer(line);
        if (!v || *v < 0)
            throw SchemaError("'" + path.string() + "' line " + std::to_string(line_no) + ": bad index");
        out.push_back(static_cast<std::size_t>(*v));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace lfshield
