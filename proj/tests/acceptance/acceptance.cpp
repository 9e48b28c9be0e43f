// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "../helpers.hpp"
#include "../oracles.hpp"
#include "lfshield/attack.hpp"
#include "lfshield/defense.hpp"
#include "lfshield/experiment.hpp"
#include "lfshield/forest.hpp"
#include "lfshield/metrics.hpp"

using namespace lfshield;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeeds[] = {2024, 7, 31337};
constexpr std::size_t kExpectedCounts[] = {16, 24, 32, 40};

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
    if (!ok) ++failures;
}

std::string sci(double x) {
    std::ostringstream s;
    s << std::scientific << x;
    return s.str();
}

void info(const std::string& text) { std::cout << "     info: " << text << std::endl; }

std::string pct(double x) {
    std::ostringstream s;
    s.precision(2);
    s << std::fixed << 100.0 * x << '%';
    return s.str();
}

ExperimentConfig base_config(std::uint64_t seed) {
    ExperimentConfig cfg;  // N=1000, separation 6, 100 trees, 79/21 split
    cfg.seed = seed;
    return cfg;
}

template <class F>
void guarded(int id, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

void criterion1() {
    guarded(1, [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run_clean(base_config(kSeeds[0]));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto& e = r.entries.at(0);
        const bool ok = e.train_accuracy >= 0.998 && e.test_accuracy >= 0.99 && secs < 30.0;
        report(1, ok,
               "clean train " + pct(e.train_accuracy) + " (>= 99.80%), test " + pct(e.test_accuracy) +
                   " (>= 99.00%), " + std::to_string(secs) + " s (< 30 s)");
    });
}

void criterion2_3() {
    bool counts_ok = true, law_ok = true, identity_ok = true;
    double worst_law = 0.0, worst_identity = 0.0;
    std::string fit_line;
    guarded(2, [&] {
        for (auto seed : kSeeds) {
            const auto r = run_attack(base_config(seed));
            counts_ok = counts_ok && r.train_rows == 790 && r.entries.size() == 4;
            for (std::size_t i = 0; i < r.entries.size(); ++i) {
                const auto& e = r.entries[i];
                counts_ok = counts_ok && e.poisoned_count == kExpectedCounts[i];
                const double dev = std::abs(e.train_accuracy - (1.0 - e.rate));
                worst_law = std::max(worst_law, dev);
                law_ok = law_ok && dev <= 0.02;
                const double id = std::abs(e.asr.value() + e.test_accuracy - 1.0);
                worst_identity = std::max(worst_identity, id);
                identity_ok = identity_ok && id <= 1e-12;
                if (seed == kSeeds[0]) {
                    fit_line += pct(e.rate) + ": " + pct(e.train_accuracy) + " vs true labels, " +
                                pct(e.train_accuracy_fit_labels) + " vs flipped labels. ";
                }
            }
        }
        report(2, counts_ok && law_ok,
               std::string("poisoned counts {16,24,32,40} on 790 rows: ") + (counts_ok ? "yes" : "no") +
                   "; max |acc - (1 - r)| = " + std::to_string(worst_law) + " (<= 0.02) over " +
                   std::to_string(std::size(kSeeds)) + " seeds");
        info("training accuracy per rate (seed " + std::to_string(kSeeds[0]) + "): " + fit_line);
        report(3, identity_ok, "max |ASR + test accuracy - 1| = " + sci(worst_identity) + " (<= 1e-12)");
    });
}

void criterion4() {
    guarded(4, [] {
        bool ok = true;
        std::string detail;
        for (auto seed : kSeeds) {
            auto cfg = base_config(seed);
            cfg.fixed_k = 1;
            cfg.k_search.exclude_self = false;
            const auto data = prepare(cfg);
            const double clean_acc = run_clean(cfg, data).entries.at(0).train_accuracy;
            const auto r = run_defense(cfg, data);
            for (const auto& e : r.entries) {
                const bool row_ok = *e.true_alarm_count == e.poisoned_count && *e.false_alarm_count == 0 &&
                                    std::abs(e.train_accuracy - clean_acc) <= 0.002;
                ok = ok && row_ok;
                if (!row_ok)
                    detail += " [seed " + std::to_string(seed) + " rate " + pct(e.rate) + ": true " +
                              std::to_string(*e.true_alarm_count) + "/" + std::to_string(e.poisoned_count) +
                              ", false " + std::to_string(*e.false_alarm_count) + ", acc " + pct(e.train_accuracy) +
                              " vs " + pct(clean_acc) + "]";
            }
        }
        report(4, ok, "K=1 with self-matches: every flip alarmed, no false alarms, accuracy within 0.2 pp of clean" +
                          detail);
    });
}

void criterion5() {
    guarded(5, [] {
        bool ok = true;
        double worst_detect = 1.0, worst_false = 0.0;
        std::string ks;
        for (auto seed : kSeeds) {
            const auto r = run_defense(base_config(seed));
            for (const auto& e : r.entries) {
                const double detect = static_cast<double>(*e.true_alarm_count) / static_cast<double>(e.poisoned_count);
                const double false_rate = static_cast<double>(*e.false_alarm_count) /
                                          static_cast<double>(r.train_rows - e.poisoned_count);
                worst_detect = std::min(worst_detect, detect);
                worst_false = std::max(worst_false, false_rate);
                ok = ok && detect >= 0.90 && false_rate <= 0.03;
                ks += std::to_string(*e.k_used) + " ";
            }
        }
        report(5, ok, "self excluded, auto K: min detection " + pct(worst_detect) + " (>= 90%), max false-alarm rate " +
                          pct(worst_false) + " (<= 3%); K used: " + ks);
    });
}

void criterion6() {
    guarded(6, [] {
        const auto ds = generate_synthetic(1000, 6.0, kSeeds[0]);
        const auto train = split(ds, 0.79, 1).train;
        const auto k_auto = choose_k(train, train, {});
        const bool odd_in_range = k_auto % 2 == 1 && k_auto >= 1 && k_auto <= 39;
        const bool include_self_one = choose_k(train, train, {.exclude_self = false}) == 1;
        const bool deterministic = choose_k(train, train, {}, 1) == k_auto;

        const auto eight = testing_helpers::make_1d({1.0, 1.4, 1.45, 2.0, 2.5, 2.8, 3.1, 3.6}, {0, 0, 0, 0, 1, 1, 1, 1});
        const auto m = oracle::knn_mismatches(eight, {1, 3}, true);
        const bool oracle_agrees = m[0] > 0 && m[1] == 0;
        const bool eight_three = choose_k(eight, eight, {}) == 3;

        report(6, odd_in_range && include_self_one && deterministic && oracle_agrees && eight_three,
               "auto K=" + std::to_string(k_auto) + " odd in [1,39]: " + (odd_in_range ? "yes" : "no") +
                   "; include-self gives 1: " + (include_self_one ? "yes" : "no") +
                   "; deterministic: " + (deterministic ? "yes" : "no") + "; 8-point instance gives 3: " +
                   (eight_three && oracle_agrees ? "yes" : "no"));
    });
}

void criterion7() {
    guarded(7, [] {
        std::mt19937_64 rng(97);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::size_t checks = 0, mismatches = 0;
        for (int q = 0; q < 1000; ++q) {
            const std::size_t n = 11 + rng() % 90;
            const std::size_t dim = 1 + rng() % 16;
            std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
            std::vector<int> labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (auto& v : rows[i]) v = u(rng);
                labels[i] = static_cast<int>(rng() % 2);
            }
            const auto ref = testing_helpers::make_dataset(rows, labels);
            std::vector<double> query(dim);
            for (auto& v : query) v = u(rng);
            for (std::size_t k = 1; k <= 11; k += 2) {
                ++checks;
                mismatches += knn_predict(ref, query, k) != oracle::knn(ref, query, k);
            }
        }
        report(7, mismatches == 0,
               std::to_string(checks) + " (query, K) pairs vs brute-force oracle, " + std::to_string(mismatches) +
                   " disagreements");
    });
}

void criterion8() {
    guarded(8, [] {
        const auto train = split(generate_synthetic(1000, 6.0, kSeeds[0]), 0.79, 1).train;
        bool involution = true;
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto r = flip_labels(train, 0.05, s);
            involution = involution && apply_flips(r.poisoned, r.flipped_indices).labels == train.labels;
        }

        std::mt19937_64 rng(5);
        bool complements = true;
        int matrices = 0;
        while (matrices < 1000) {
            const ConfusionMatrix cm{1 + rng() % 500, 1 + rng() % 500, rng() % 500, rng() % 500};
            const auto m = rates(cm);
            complements = complements && std::abs(*m.tpr + *m.fnr - 1.0) <= 1e-15 &&
                          std::abs(*m.tnr + *m.fpr - 1.0) <= 1e-15;
            ++matrices;
        }

        bool gini_ok = true;
        for (std::size_t a = 0; a <= 200; ++a)
            for (std::size_t b = 0; b <= 200; ++b)
                if (a + b > 0) {
                    const double g = gini_from_counts(a, b);
                    gini_ok = gini_ok && g >= 0.0 && g <= 0.5;
                }

        ForestParams p;
        p.n_trees = 25;
        p.seed = 3;
        const auto model = train_forest(generate_synthetic(300, 0.5, 2), p);
        std::normal_distribution<double> nd(0.0, 4.0);
        bool value_ok = true;
        std::vector<double> x(kFeatureCount);
        for (int i = 0; i < 2000; ++i) {
            for (auto& v : x) v = nd(rng);
            const double v = predict_value(model, x);
            value_ok = value_ok && v >= 0.0 && v <= 1.0;
        }

        report(8, involution && complements && gini_ok && value_ok,
               std::string("flip involution x100: ") + (involution ? "ok" : "broken") +
                   "; TPR+FNR = TNR+FPR = 1 on 1000 matrices: " + (complements ? "ok" : "broken") +
                   "; gini in [0, 0.5]: " + (gini_ok ? "ok" : "broken") + "; predict_value in [0, 1]: " +
                   (value_ok ? "ok" : "broken"));
    });
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("'") + LFSHIELD_CLI_PATH + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion9() {
    guarded(9, [] {
        testing_helpers::TempDir dir("acceptance");
        for (const char* name : {"a", "b"}) {
            std::ofstream(dir / (std::string(name) + ".cfg"))
                << "source = synthetic\nseed = " << kSeeds[0] << "\noutput_dir = out_" << name << '\n';
        }
        const int rc_a = run_cli("run --config '" + (dir / "a.cfg").string() + "'");
        const int rc_b = run_cli("--threads 1 run --config '" + (dir / "b.cfg").string() + "'");
        const auto a = testing_helpers::read_text(dir / "out_a/report.json");
        const auto b = testing_helpers::read_text(dir / "out_b/report.json");
        report(9, rc_a == 0 && rc_b == 0 && !a.empty() && a == b,
               "two `run --config` executions: exit " + std::to_string(rc_a) + "/" + std::to_string(rc_b) + ", " +
                   std::to_string(a.size()) + "-byte report.json " + (a == b ? "identical" : "differs"));
    });
}

}  // namespace

int main() {
    criterion1();
    criterion2_3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
