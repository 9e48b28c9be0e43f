#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lfshield/dataset.hpp"
#include "lfshield/defense.hpp"
#include "lfshield/forest.hpp"
#include "lfshield/metrics.hpp"

namespace lfshield {

enum class SourceKind { Synthetic, UrlCsv, FeatureCsv };

struct ExperimentConfig {
    SourceKind source = SourceKind::Synthetic;
    std::filesystem::path input;              // UrlCsv / FeatureCsv
    std::size_t synthetic_n = 1000;
    double synthetic_separation = 6.0;
    bool scale = true;
    bool dedup_hostnames = true;

    double split_ratio = 0.79;
    std::uint64_t seed = 0;
    ForestParams forest;                      // forest.seed is derived from `seed`
    std::vector<double> rates = {0.02, 0.03, 0.04, 0.05};

    KSearchConfig k_search;
    std::optional<std::size_t> fixed_k;       // nullopt: choose_k
    double reference_fraction = 1.0;          // < 1: trusted random sample of the clean split

    std::filesystem::path output_dir;         // empty: nothing written
    unsigned threads = 0;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Flat `key = value` document, `#` comments. Unknown or repeated keys are a
/// ConfigError. Relative paths are resolved against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sub-seeds of one experiment, derived from the master seed by tag.
struct SeedPlan {
    std::uint64_t master = 0;
    std::uint64_t data = 0;
    std::uint64_t split = 0;
    std::uint64_t forest = 0;
    std::uint64_t reference = 0;

    explicit SeedPlan(std::uint64_t master_seed);
    std::uint64_t attack(double rate) const;
};

struct RateEntry {
    double rate = 0.0;
    std::size_t poisoned_count = 0;
    // Training rows scored against their true (pre-attack) labels.
    double train_accuracy = 0.0;
    // Training rows scored against the labels the model was trained on.
    double train_accuracy_fit_labels = 0.0;
    double test_accuracy = 0.0;
    ConfusionMatrix test_confusion;
    MetricsReport test_metrics;
    std::optional<double> asr;
    std::optional<std::size_t> detected_count;
    std::optional<std::size_t> true_alarm_count;
    std::optional<std::size_t> false_alarm_count;
    std::optional<std::size_t> k_used;
};

struct RunReport {
    std::string phase;  // clean | attack | defense
    std::string dataset_id;
    std::size_t dataset_rows = 0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    SeedPlan seeds{0};
    std::vector<RateEntry> entries;
    std::vector<std::pair<std::size_t, std::size_t>> k_search;  // defense: (K, mismatches)
    std::map<std::string, double> timings_s;                    // not part of to_json()
};

/// Loaded/generated dataset, its split and the clean model, shared by the phases.
struct PreparedData {
    LabeledDataset dataset;
    SplitDataset split;
    ForestModel clean_model;
    ForestParams forest_params;
    double prepare_seconds = 0.0;
};

PreparedData prepare(const ExperimentConfig& cfg);

/// Train and report clean train/test accuracy. Writes the model, the split
/// and plot data under <output_dir>/clean when output_dir is set.
RunReport run_clean(const ExperimentConfig& cfg);
RunReport run_clean(const ExperimentConfig& cfg, const PreparedData& data);

/// Per rate: flip training labels, retrain, score. Writes flips.csv,
/// poisoned_train.csv and plot.csv under <output_dir>/attack/rate_<r>.
RunReport run_attack(const ExperimentConfig& cfg);
RunReport run_attack(const ExperimentConfig& cfg, const PreparedData& data);

/// Per rate: reproduce the attack, choose K on the clean reference,
/// sanitize, retrain on the recovered labels and score. Writes alarms.csv,
/// alarms.log, recovered_train.csv and plot.csv under <output_dir>/defense/rate_<r>.
RunReport run_defense(const ExperimentConfig& cfg);
RunReport run_defense(const ExperimentConfig& cfg, const PreparedData& data);

struct ExperimentReport {
    RunReport clean;
    RunReport attack;
    RunReport defense;
};

/// All three phases. With output_dir set, also writes report.json (no
/// timings, byte-stable for a given config), timings.json and tables.txt.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

nlohmann::ordered_json to_json(const MetricsReport& m);
nlohmann::ordered_json to_json(const RunReport& report);
nlohmann::ordered_json to_json(const ExperimentReport& report);

/// Aligned text tables in the column order of the clean/attack/defense tables.
std::string render_tables(const ExperimentReport& report);

/// CSV `index,label,flipped` for scatter plots; returns the row count.
std::size_t emit_plot_data(const LabeledDataset& ds, const std::vector<std::size_t>* flipped,
                           const std::filesystem::path& out);

/// "0.02" style directory tag for a rate.
std::string rate_tag(double rate);

}  // namespace lfshield
