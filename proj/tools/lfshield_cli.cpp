// lfshield: train URL forests, inject label-flipping attacks and sanitize
// poisoned training sets from the command line.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal
// invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lfshield/attack.hpp"
#include "lfshield/csv.hpp"
#include "lfshield/dataset.hpp"
#include "lfshield/defense.hpp"
#include "lfshield/errors.hpp"
#include "lfshield/experiment.hpp"
#include "lfshield/forest.hpp"
#include "lfshield/metrics.hpp"

namespace fs = std::filesystem;
using namespace lfshield;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int exit_code(const Error& e) {
    switch (e.error_class()) {
        case ErrorClass::Usage: return kExitUsage;
        case ErrorClass::Data: return kExitData;
        case ErrorClass::Invariant: return kExitInternal;
    }
    return kExitInternal;
}

std::size_t parse_k(const std::string& text) {
    const auto v = csv::parse_integer(text);
    if (!v || *v < 1 || *v % 2 == 0) throw KError("--k must be 'auto' or an odd positive integer");
    return static_cast<std::size_t>(*v);
}

void cmd_ingest(const fs::path& input, std::uint64_t seed, const fs::path& output, bool no_scale, bool keep_hosts) {
    const auto records = load_csv(input);
    const auto ds = preprocess(records, {seed, !no_scale, !keep_hosts});
    fs::create_directories(output);
    write_feature_csv(ds, output / "features.csv");
    std::ofstream urls(output / "urls.csv", std::ios::binary);
    urls << "url,label\n";
    for (const auto& r : ds.records) urls << csv::quote(r.raw) << ',' << as_int(r.label) << '\n';
    if (!urls) throw IoError("cannot write urls.csv");
    std::cout << "read " << records.size() << " records, kept " << ds.size() << " after cleaning\n"
              << "wrote " << (output / "features.csv").string() << '\n';
}

void cmd_synth(std::size_t n, double separation, std::uint64_t seed, const fs::path& output) {
    const auto ds = generate_synthetic(n, separation, seed);
    write_feature_csv(ds, output);
    std::cout << "wrote " << ds.size() << " rows to " << output.string() << '\n';
}

void cmd_train(const fs::path& data, const ForestParams& params, const fs::path& model_path, unsigned threads) {
    const auto ds = read_feature_csv(data);
    const auto model = train_forest(ds, params, threads);
    save_model(model, model_path);
    std::cout << "trained " << model.trees().size() << " trees on " << ds.size() << " rows; training accuracy "
              << accuracy(model, ds) << '\n';
}

void cmd_evaluate(const fs::path& model_path, const fs::path& data) {
    const auto model = load_model(model_path);
    const auto ds = read_feature_csv(data);
    const auto cm = confusion(predict_classes(model, ds.features), ds.labels);
    auto j = to_json(rates(cm));
    j["confusion"] = {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
    std::cout << j.dump(2) << '\n';
}

void cmd_attack(const fs::path& data, double rate, std::uint64_t seed, const fs::path& out) {
    const auto ds = read_feature_csv(data);
    const auto result = flip_labels(ds, rate, seed);
    fs::create_directories(out);
    write_feature_csv(result.poisoned, out / "poisoned.csv");
    write_flip_indices(result.flipped_indices, out / "flips.csv");
    std::cout << "flipped " << result.flipped_indices.size() << " of " << ds.size() << " labels (rate " << rate
              << ")\n";
}

void cmd_defend(const fs::path& reference_path, const fs::path& untrusted_path, const std::string& k_text,
                bool include_self, const fs::path& out, unsigned threads) {
    const auto reference = read_feature_csv(reference_path);
    const auto untrusted = read_feature_csv(untrusted_path);
    KSearchConfig cfg;
    cfg.exclude_self = !include_self;
    std::size_t k = 0;
    if (k_text == "auto") {
        const auto trace = search_k(reference, untrusted, cfg, threads);
        for (const auto& [cand, lm] : trace.mismatches) std::cout << "K=" << cand << " mismatches=" << lm << '\n';
        k = trace.k;
    } else {
        k = parse_k(k_text);
    }
    const auto result = sanitize(reference, untrusted, k, cfg.exclude_self, threads);
    fs::create_directories(out);
    write_alarm_csv(result.alarms, out / "alarms.csv");
    write_feature_csv(result.recovered, out / "recovered.csv");
    std::ofstream log(out / "alarms.log", std::ios::binary);
    write_alarm_log(result.alarms, log);
    write_alarm_log(result.alarms, std::cout);
    std::cout << "K=" << k << ": " << result.alarms.size() << " alarms over " << untrusted.size() << " rows\n";
}

void cmd_run(const fs::path& config_path, std::optional<unsigned> threads) {
    auto cfg = load_config(config_path);
    if (threads) cfg.threads = *threads;
    const auto report = run_experiment(cfg);
    std::cout << render_tables(report);
    if (!cfg.output_dir.empty()) std::cout << "\nreport written to " << (cfg.output_dir / "report.json").string() << '\n';
}

void cmd_plotdata(const fs::path& data, const std::optional<fs::path>& flips, const fs::path& output) {
    const auto ds = read_feature_csv(data);
    std::optional<std::vector<std::size_t>> indices;
    if (flips) indices = read_flip_indices(*flips);
    const auto rows = emit_plot_data(ds, indices ? &*indices : nullptr, output);
    std::cout << "wrote " << rows << " rows to " << output.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label-flipping attack and K-NN sanitization workbench for URL forests"};
    app.require_subcommand(1);
    unsigned threads = 0;
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = all cores)");

    std::string input, output, data, model, out, reference, untrusted, config, flips;
    std::uint64_t seed = 0;
    bool no_scale = false, keep_hosts = false;
    auto* ingest = app.add_subcommand("ingest", "Clean a url,label CSV and extract scaled features");
    ingest->add_option("--input", input, "url,label CSV")->required();
    ingest->add_option("--seed", seed, "Shuffle seed");
    ingest->add_option("--output", output, "Output directory")->required();
    ingest->add_flag("--no-scale", no_scale, "Skip IQR rescaling");
    ingest->add_flag("--keep-duplicate-hosts", keep_hosts, "Keep rows that repeat a hostname");

    std::size_t n = 1000;
    double separation = 6.0;
    auto* synth = app.add_subcommand("synth", "Generate a two-cluster synthetic feature dataset");
    synth->add_option("--n", n, "Row count")->required();
    synth->add_option("--separation", separation, "Distance between cluster means per coordinate")->required();
    synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--output", output, "Feature CSV to write")->required();

    ForestParams params;
    std::string max_depth = "unlimited";
    bool no_bootstrap = false;
    auto* train = app.add_subcommand("train", "Train a random forest on a feature CSV");
    train->add_option("--data", data, "Feature CSV")->required();
    train->add_option("--trees", params.n_trees, "Number of trees");
    train->add_option("--seed", params.seed, "Forest seed");
    train->add_option("--model", model, "Model file to write")->required();
    train->add_option("--max-features", params.max_features, "Features tried per split (0 = ceil(sqrt(dim)))");
    train->add_option("--max-depth", max_depth, "Depth limit or 'unlimited'");
    train->add_option("--min-samples-split", params.min_samples_split, "Smallest node that may be split");
    train->add_flag("--no-bootstrap", no_bootstrap, "Train every tree on the full set");

    auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on a feature CSV");
    evaluate->add_option("--model", model, "Model file")->required();
    evaluate->add_option("--data", data, "Feature CSV")->required();

    double rate = 0.0;
    auto* attack = app.add_subcommand("attack", "Flip a random share of training labels");
    attack->add_option("--data", data, "Feature CSV")->required();
    attack->add_option("--rate", rate, "Poison rate in [0, 1]")->required();
    attack->add_option("--seed", seed, "Attack seed");
    attack->add_option("--out", out, "Output directory")->required();

    std::string k_text = "auto";
    bool include_self = false;
    auto* defend = app.add_subcommand("defend", "Detect and restore flipped labels with K-NN");
    defend->add_option("--reference", reference, "Trusted feature CSV")->required();
    defend->add_option("--untrusted", untrusted, "Possibly poisoned feature CSV (same rows)")->required();
    defend->add_option("--k", k_text, "'auto' or an odd K");
    defend->add_flag("--include-self", include_self, "Let a row count as its own neighbour");
    defend->add_option("--out", out, "Output directory")->required();

    auto* run = app.add_subcommand("run", "Run the clean, attack and defense phases from a config file");
    run->add_option("--config", config, "key = value config file")->required();

    auto* plot = app.add_subcommand("plotdata", "Write index,label,flipped CSV for scatter plots");
    plot->add_option("--data", data, "Feature CSV")->required();
    plot->add_option("--flips", flips, "Flip index CSV");
    plot->add_option("--output", output, "CSV to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*ingest) cmd_ingest(input, seed, output, no_scale, keep_hosts);
        else if (*synth) cmd_synth(n, separation, seed, output);
        else if (*train) {
            if (max_depth != "unlimited") {
                const auto d = csv::parse_integer(max_depth);
                if (!d || *d < 0) throw ArgError("--max-depth must be a non-negative integer or 'unlimited'");
                params.max_depth = static_cast<std::size_t>(*d);
            }
            params.bootstrap = !no_bootstrap;
            cmd_train(data, params, model, threads);
        } else if (*evaluate) cmd_evaluate(model, data);
        else if (*attack) cmd_attack(data, rate, seed, out);
        else if (*defend) cmd_defend(reference, untrusted, k_text, include_self, out, threads);
        else if (*run) cmd_run(config, threads_opt->count() ? std::optional<unsigned>(threads) : std::nullopt);
        else if (*plot) cmd_plotdata(data, flips.empty() ? std::nullopt : std::optional<fs::path>(flips), output);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
