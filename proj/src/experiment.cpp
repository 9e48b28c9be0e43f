#include "lfshield/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "lfshield/attack.hpp"
#include "lfshield/csv.hpp"
#include "lfshield/errors.hpp"
#include "lfshield/seeding.hpp"

namespace lfshield {

// ---- configuration ---------------------------------------------------------

void ExperimentConfig::validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must lie in (0, 1)");
    for (double r : rates)
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("every rate must lie in [0, 1]");
    if (source != SourceKind::Synthetic && input.empty()) throw ConfigError("input is required for csv sources");
    if (source == SourceKind::Synthetic) {
        if (synthetic_n < 2) throw ConfigError("synthetic_n must be at least 2");
        if (!(synthetic_separation > 0.0)) throw ConfigError("synthetic_separation must be positive");
    }
    if (forest.n_trees < 1) throw ConfigError("trees must be at least 1");
    if (forest.min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
    if (k_search.candidates.empty()) throw ConfigError("k_candidates must not be empty");
    for (auto k : k_search.candidates)
        if (k == 0 || k % 2 == 0) throw ConfigError("k_candidates must be odd and >= 1");
    if (fixed_k && (*fixed_k == 0 || *fixed_k % 2 == 0)) throw ConfigError("k must be 'auto' or an odd integer");
    if (!(reference_fraction > 0.0 && reference_fraction <= 1.0))
        throw ConfigError("reference_fraction must lie in (0, 1]");
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
    const auto s = lower(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + std::string(v) + "'");
}

std::uint64_t parse_unsigned(const std::string& key, std::string_view v) {
    const auto x = csv::parse_integer(v);
    if (!x || *x < 0) throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return static_cast<std::uint64_t>(*x);
}

double parse_real(const std::string& key, std::string_view v) {
    const auto x = csv::parse_double(v);
    if (!x) throw ConfigError(key + ": expected a number, got '" + std::string(v) + "'");
    return *x;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, std::string_view v, Parse parse) {
    std::vector<T> out;
    while (true) {
        const auto comma = v.find(',');
        const auto item = csv::trim(v.substr(0, comma));
        if (item.empty()) throw ConfigError(key + ": empty list item");
        out.push_back(static_cast<T>(parse(key, item)));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = csv::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
        const std::string key = lower(csv::trim(line.substr(0, eq)));
        const std::string_view value = csv::trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty value for '" + key + "'");

        if (key == "source") {
            const auto s = lower(value);
            if (s == "synthetic") cfg.source = SourceKind::Synthetic;
            else if (s == "csv" || s == "urls") cfg.source = SourceKind::UrlCsv;
            else if (s == "features") cfg.source = SourceKind::FeatureCsv;
            else throw ConfigError("source: expected synthetic, csv or features");
        } else if (key == "input") {
            cfg.input = resolve(base_dir, value);
        } else if (key == "synthetic_n") {
            cfg.synthetic_n = parse_unsigned(key, value);
        } else if (key == "synthetic_separation") {
            cfg.synthetic_separation = parse_real(key, value);
        } else if (key == "scale") {
            cfg.scale = parse_bool(key, value);
        } else if (key == "dedup_hostnames") {
            cfg.dedup_hostnames = parse_bool(key, value);
        } else if (key == "split_ratio") {
            cfg.split_ratio = parse_real(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_unsigned(key, value);
        } else if (key == "trees") {
            cfg.forest.n_trees = parse_unsigned(key, value);
        } else if (key == "max_features") {
            cfg.forest.max_features = lower(value) == "auto" ? 0 : parse_unsigned(key, value);
        } else if (key == "max_depth") {
            if (lower(value) == "unlimited") cfg.forest.max_depth.reset();
            else cfg.forest.max_depth = parse_unsigned(key, value);
        } else if (key == "min_samples_split") {
            cfg.forest.min_samples_split = parse_unsigned(key, value);
        } else if (key == "bootstrap") {
            cfg.forest.bootstrap = parse_bool(key, value);
        } else if (key == "rates") {
            cfg.rates = parse_list<double>(key, value, parse_real);
        } else if (key == "k") {
            if (lower(value) == "auto") cfg.fixed_k.reset();
            else cfg.fixed_k = parse_unsigned(key, value);
        } else if (key == "k_candidates") {
            cfg.k_search.candidates = parse_list<std::size_t>(key, value, parse_unsigned);
        } else if (key == "exclude_self") {
            cfg.k_search.exclude_self = parse_bool(key, value);
        } else if (key == "reference_fraction") {
            cfg.reference_fraction = parse_real(key, value);
        } else if (key == "output_dir") {
            cfg.output_dir = resolve(base_dir, value);
        } else if (key == "threads") {
            cfg.threads = static_cast<unsigned>(parse_unsigned(key, value));
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

// ---- seeds -----------------------------------------------------------------

SeedPlan::SeedPlan(std::uint64_t master_seed)
    : master(master_seed),
      data(derive_seed(master_seed, "data")),
      split(derive_seed(master_seed, "split")),
      forest(derive_seed(master_seed, "forest")),
      reference(derive_seed(master_seed, "reference")) {}

std::uint64_t SeedPlan::attack(double rate) const {
    // Keyed by the rate itself so adding or reordering rates keeps each draw.
    return derive_seed(derive_seed(master, "attack"), static_cast<std::uint64_t>(std::llround(rate * 1e6)));
}

// ---- phases ----------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

RunReport make_report(std::string phase, const ExperimentConfig& cfg, const PreparedData& data) {
    RunReport r;
    r.phase = std::move(phase);
    r.dataset_id = data.dataset.id;
    r.dataset_rows = data.dataset.size();
    r.train_rows = data.split.train.size();
    r.test_rows = data.split.test.size();
    r.seeds = SeedPlan(cfg.seed);
    return r;
}

// Scores `model` (trained on `fit_labels`) on the split.
RateEntry score(const ForestModel& model, const SplitDataset& split, std::span<const Label> fit_labels, double rate) {
    RateEntry e;
    e.rate = rate;
    e.train_accuracy = accuracy(model, split.train);
    e.train_accuracy_fit_labels = accuracy_against(model, split.train.features, fit_labels);
    const auto preds = predict_classes(model, split.test.features);
    e.test_confusion = confusion(preds, split.test.labels);
    e.test_metrics = rates(e.test_confusion);
    e.test_accuracy = e.test_metrics.accuracy;
    return e;
}

void attach_asr(RateEntry& e, const ForestModel& model, const LabeledDataset& test) {
    const double a = asr(model, test);
    if (std::abs(a + e.test_accuracy - 1.0) > 1e-12) throw InvariantError("ASR + test accuracy != 1");
    e.asr = a;
    e.test_metrics.asr = a;
}

std::filesystem::path phase_dir(const ExperimentConfig& cfg, const std::string& phase, std::optional<double> rate) {
    auto dir = cfg.output_dir / phase;
    if (rate) dir /= "rate_" + rate_tag(*rate);
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<std::size_t> label_differences(const LabeledDataset& a, const LabeledDataset& b) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.labels[i] != b.labels[i]) out.push_back(i);
    return out;
}

}  // namespace

std::string rate_tag(double rate) { return csv::format_double(rate); }

PreparedData prepare(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const SeedPlan seeds(cfg.seed);
    PreparedData out;
    switch (cfg.source) {
        case SourceKind::Synthetic:
            out.dataset = generate_synthetic(cfg.synthetic_n, cfg.synthetic_separation, seeds.data);
            break;
        case SourceKind::UrlCsv:
            out.dataset = preprocess(load_csv(cfg.input), {seeds.data, cfg.scale, cfg.dedup_hostnames});
            out.dataset.id = cfg.input.stem().string();
            break;
        case SourceKind::FeatureCsv:
            out.dataset = read_feature_csv(cfg.input);
            break;
    }
    out.dataset.validate();
    out.split = split(out.dataset, cfg.split_ratio, seeds.split);
    if (out.split.train.empty() || out.split.test.empty())
        throw ConfigError("split leaves an empty train or test side");
    out.forest_params = cfg.forest;
    out.forest_params.seed = seeds.forest;
    out.clean_model = train_forest(out.split.train, out.forest_params, cfg.threads);
    out.prepare_seconds = seconds_since(t0);
    return out;
}

RunReport run_clean(const ExperimentConfig& cfg) { return run_clean(cfg, prepare(cfg)); }

RunReport run_clean(const ExperimentConfig& cfg, const PreparedData& data) {
    const auto t0 = Clock::now();
    RunReport report = make_report("clean", cfg, data);
    report.entries.push_back(score(data.clean_model, data.split, data.split.train.labels, 0.0));
    report.entries.back().poisoned_count = 0;
    if (!cfg.output_dir.empty()) {
        const auto dir = phase_dir(cfg, "clean", std::nullopt);
        save_model(data.clean_model, dir / "model.lfs");
        write_feature_csv(data.split.train, dir / "train.csv");
        write_feature_csv(data.split.test, dir / "test.csv");
        emit_plot_data(data.dataset, nullptr, dir / "plot.csv");
    }
    report.timings_s["prepare"] = data.prepare_seconds;
    report.timings_s["phase"] = seconds_since(t0);
    return report;
}

RunReport run_attack(const ExperimentConfig& cfg) { return run_attack(cfg, prepare(cfg)); }

RunReport run_attack(const ExperimentConfig& cfg, const PreparedData& data) {
    const auto t0 = Clock::now();
    RunReport report = make_report("attack", cfg, data);
    for (double rate : cfg.rates) {
        const auto attack = flip_labels(data.split.train, rate, report.seeds.attack(rate));
        const auto model = train_forest(attack.poisoned, data.forest_params, cfg.threads);
        RateEntry e = score(model, data.split, attack.poisoned.labels, rate);
        e.poisoned_count = attack.flipped_indices.size();
        attach_asr(e, model, data.split.test);
        report.entries.push_back(e);

        if (!cfg.output_dir.empty()) {
            const auto dir = phase_dir(cfg, "attack", rate);
            write_flip_indices(attack.flipped_indices, dir / "flips.csv");
            write_feature_csv(attack.poisoned, dir / "poisoned_train.csv");
            emit_plot_data(attack.poisoned, &attack.flipped_indices, dir / "plot.csv");
        }
    }
    report.timings_s["prepare"] = data.prepare_seconds;
    report.timings_s["phase"] = seconds_since(t0);
    return report;
}

RunReport run_defense(const ExperimentConfig& cfg) { return run_defense(cfg, prepare(cfg)); }

RunReport run_defense(const ExperimentConfig& cfg, const PreparedData& data) {
    const auto t0 = Clock::now();
    RunReport report = make_report("defense", cfg, data);
    const auto& clean = data.split.train;

    // Reference: the whole clean training split, or a trusted random sample of it.
    const bool full_reference = cfg.reference_fraction >= 1.0;
    LabeledDataset trusted;
    if (!full_reference) {
        std::vector<std::size_t> rows(clean.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        Engine rng(report.seeds.reference);
        seeded_shuffle(rows.begin(), rows.end(), rng);
        rows.resize(std::max<std::size_t>(1, floor_fraction(cfg.reference_fraction, clean.size())));
        std::sort(rows.begin(), rows.end());
        trusted = clean.subset(rows, clean.id + "/trusted");
    }
    const LabeledDataset& reference = full_reference ? clean : trusted;

    std::size_t k = 0;
    if (cfg.fixed_k) {
        k = *cfg.fixed_k;
    } else {
        const auto trace = search_k(reference, reference, cfg.k_search, cfg.threads);
        k = trace.k;
        report.k_search = trace.mismatches;
    }

    for (double rate : cfg.rates) {
        const auto attack = flip_labels(clean, rate, report.seeds.attack(rate));
        const DefenseResult defended = full_reference
                                           ? sanitize(clean, attack.poisoned, k, cfg.k_search.exclude_self, cfg.threads)
                                           : sanitize_with_trusted(reference, attack.poisoned, k, cfg.threads);
        const auto model = train_forest(defended.recovered, data.forest_params, cfg.threads);
        RateEntry e = score(model, data.split, defended.recovered.labels, rate);
        e.poisoned_count = attack.flipped_indices.size();
        attach_asr(e, model, data.split.test);

        std::size_t true_alarms = 0;
        for (const auto& a : defended.alarms)
            true_alarms += std::binary_search(attack.flipped_indices.begin(), attack.flipped_indices.end(), a.index) ? 1 : 0;
        e.detected_count = defended.alarms.size();
        e.true_alarm_count = true_alarms;
        e.false_alarm_count = defended.alarms.size() - true_alarms;
        e.k_used = k;
        if (*e.detected_count != *e.true_alarm_count + *e.false_alarm_count)
            throw InvariantError("detected != true + false alarms");
        report.entries.push_back(e);

        if (!cfg.output_dir.empty()) {
            const auto dir = phase_dir(cfg, "defense", rate);
            write_alarm_csv(defended.alarms, dir / "alarms.csv");
            std::ofstream log(dir / "alarms.log", std::ios::binary);
            write_alarm_log(defended.alarms, log);
            write_feature_csv(defended.recovered, dir / "recovered_train.csv");
            const auto residual = label_differences(defended.recovered, clean);
            emit_plot_data(defended.recovered, &residual, dir / "plot.csv");
        }
    }
    report.timings_s["prepare"] = data.prepare_seconds;
    report.timings_s["phase"] = seconds_since(t0);
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const PreparedData data = prepare(cfg);
    ExperimentReport out{run_clean(cfg, data), run_attack(cfg, data), run_defense(cfg, data)};
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        {
            std::ofstream f(cfg.output_dir / "report.json", std::ios::binary);
            f << to_json(out).dump(2) << '\n';
            if (!f) throw IoError("cannot write report.json");
        }
        {
            nlohmann::ordered_json t;
            for (const RunReport* r : {&out.clean, &out.attack, &out.defense}) t[r->phase] = r->timings_s;
            std::ofstream f(cfg.output_dir / "timings.json", std::ios::binary);
            f << t.dump(2) << '\n';
        }
        std::ofstream f(cfg.output_dir / "tables.txt", std::ios::binary);
        f << render_tables(out);
    }
    return out;
}

// ---- reporting -------------------------------------------------------------

namespace {
template <typename T>
nlohmann::ordered_json opt(const std::optional<T>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
}  // namespace

nlohmann::ordered_json to_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["tpr"] = opt(m.tpr);
    j["tnr"] = opt(m.tnr);
    j["fpr"] = opt(m.fpr);
    j["fnr"] = opt(m.fnr);
    j["accuracy"] = m.accuracy;
    j["asr"] = opt(m.asr);
    return j;
}

nlohmann::ordered_json to_json(const RunReport& report) {
    nlohmann::ordered_json j;
    j["phase"] = report.phase;
    j["dataset"] = {{"id", report.dataset_id},
                    {"rows", report.dataset_rows},
                    {"train_rows", report.train_rows},
                    {"test_rows", report.test_rows}};
    j["seeds"] = {{"master", report.seeds.master},
                  {"data", report.seeds.data},
                  {"split", report.seeds.split},
                  {"forest", report.seeds.forest},
                  {"reference", report.seeds.reference}};
    j["train_accuracy_basis"] = "true (pre-attack) labels; train_accuracy_fit_labels uses the labels the model was trained on";
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json je;
        je["rate"] = e.rate;
        if (report.phase != "clean") je["attack_seed"] = report.seeds.attack(e.rate);
        je["poisoned_count"] = e.poisoned_count;
        je["train_accuracy"] = e.train_accuracy;
        je["train_accuracy_fit_labels"] = e.train_accuracy_fit_labels;
        je["test_accuracy"] = e.test_accuracy;
        je["asr"] = opt(e.asr);
        je["detected_count"] = opt(e.detected_count);
        je["true_alarm_count"] = opt(e.true_alarm_count);
        je["false_alarm_count"] = opt(e.false_alarm_count);
        je["k_used"] = opt(e.k_used);
        je["test_confusion"] = {{"tp", e.test_confusion.tp},
                                {"tn", e.test_confusion.tn},
                                {"fp", e.test_confusion.fp},
                                {"fn", e.test_confusion.fn}};
        je["test_metrics"] = to_json(e.test_metrics);
        entries.push_back(je);
    }
    j["entries"] = entries;
    if (!report.k_search.empty()) {
        auto ks = nlohmann::ordered_json::array();
        for (const auto& [k, lm] : report.k_search) ks.push_back({{"k", k}, {"mismatches", lm}});
        j["k_search"] = ks;
    }
    return j;
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["clean"] = to_json(report.clean);
    j["attack"] = to_json(report.attack);
    j["defense"] = to_json(report.defense);
    return j;
}

namespace {
std::string pct(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v * 100.0 << '%';
    return s.str();
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            out << (c ? " | " : "") << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
        out << '\n';
    };
    line(header);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "-+-" : "") << std::string(width[c], '-');
    out << '\n';
    for (const auto& r : rows) line(r);
    return out.str();
}
}  // namespace

std::string render_tables(const ExperimentReport& report) {
    std::ostringstream out;
    out << "Clean run (" << report.clean.dataset_id << ")\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : report.clean.entries) rows.push_back({report.clean.dataset_id, pct(e.train_accuracy), pct(e.test_accuracy)});
    out << table({"Dataset", "Tr. Accuracy", "Te. Accuracy"}, rows) << '\n';

    out << "Random label-flipping attack (Tr. Accuracy against true labels)\n";
    rows.clear();
    for (const auto& e : report.attack.entries)
        rows.push_back({pct(e.rate), std::to_string(e.poisoned_count), pct(e.train_accuracy), pct(e.asr.value_or(0.0)),
                        pct(e.test_accuracy)});
    out << table({"Poison%", "Poisoned Count", "Tr. Accuracy", "ASR", "Te. Accuracy"}, rows) << '\n';

    out << "K-NN defense against random label flipping\n";
    rows.clear();
    for (const auto& e : report.defense.entries)
        rows.push_back({pct(e.rate), pct(e.train_accuracy), std::to_string(e.detected_count.value_or(0)),
                        std::to_string(e.true_alarm_count.value_or(0)), std::to_string(e.false_alarm_count.value_or(0)),
                        std::to_string(e.k_used.value_or(0))});
    out << table({"Poison%", "Tr. Accuracy", "Det. Poisoned labels", "True alarms", "False alarms", "K"}, rows);
    return out.str();
}

std::size_t emit_plot_data(const LabeledDataset& ds, const std::vector<std::size_t>* flipped,
                           const std::filesystem::path& out) {
    if (ds.empty()) throw ArgError("cannot emit plot data for an empty dataset");
    std::vector<bool> mark(ds.size(), false);
    if (flipped) {
        for (auto i : *flipped) {
            if (i >= ds.size()) throw ArgError("flip index " + std::to_string(i) + " out of range");
            mark[i] = true;
        }
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write '" + out.string() + "'");
    f << "index,label,flipped\n";
    for (std::size_t i = 0; i < ds.size(); ++i) f << i << ',' << as_int(ds.labels[i]) << ',' << (mark[i] ? 1 : 0) << '\n';
    if (!f) throw IoError("write error on '" + out.string() + "'");
    return ds.size();
}

}  // namespace lfshield
