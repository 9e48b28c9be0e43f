#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lfshield/dataset.hpp"

namespace testing_helpers {

inline lfshield::LabeledDataset make_dataset(const std::vector<std::vector<double>>& rows,
                                             const std::vector<int>& labels, std::string id = "handmade") {
    lfshield::LabeledDataset ds;
    ds.id = std::move(id);
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    ds.features = lfshield::FeatureMatrix(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j) ds.features(i, j) = rows[i][j];
    for (int l : labels) ds.labels.push_back(lfshield::label_from_int(l));
    return ds;
}

inline lfshield::LabeledDataset make_1d(const std::vector<double>& xs, const std::vector<int>& labels) {
    std::vector<std::vector<double>> rows;
    for (double x : xs) rows.push_back({x});
    return make_dataset(rows, labels, "1d");
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("lfshield-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_helpers
