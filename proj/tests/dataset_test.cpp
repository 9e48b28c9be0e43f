#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "lfshield/dataset.hpp"
#include "lfshield/errors.hpp"
#include "oracles.hpp"

using namespace lfshield;
using testing_helpers::TempDir;
using testing_helpers::write_text;

// ---- load_csv --------------------------------------------------------------

TEST(LoadCsv, ReadsValidRows) {
    TempDir dir("load");
    write_text(dir / "u.csv", "url,label\nexample.com,0\n\"http://bad.test/a,b\",1\nhttps://x.org/?q=1,0\n");
    const auto recs = load_csv(dir / "u.csv");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[1].raw, "http://bad.test/a,b");
    EXPECT_EQ(recs[1].label, Label::Malicious);
}

TEST(LoadCsv, HeaderOnlyGivesEmptyList) {
    TempDir dir("load");
    write_text(dir / "u.csv", "url,label\n");
    EXPECT_TRUE(load_csv(dir / "u.csv").empty());
}

TEST(LoadCsv, OutOfRangeLabelReportsLine) {
    TempDir dir("load");
    write_text(dir / "u.csv", "url,label\na.com,1\n\"example.com\",2\n");
    try {
        load_csv(dir / "u.csv");
        FAIL() << "expected LabelError";
    } catch (const LabelError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(LoadCsv, SchemaAndIoErrors) {
    TempDir dir("load");
    write_text(dir / "bad_header.csv", "link,class\na.com,0\n");
    EXPECT_THROW(load_csv(dir / "bad_header.csv"), SchemaError);
    write_text(dir / "empty_url.csv", "url,label\n ,0\n");
    EXPECT_THROW(load_csv(dir / "empty_url.csv"), SchemaError);
    EXPECT_THROW(load_csv(dir / "missing.csv"), IoError);
}

// ---- iqr_rescale -----------------------------------------------------------

TEST(IqrRescale, ReferenceValues) {
    EXPECT_EQ(iqr_rescale(std::vector<double>{5, 5, 5, 5}), (std::vector<double>{0, 0, 0, 0}));
    EXPECT_EQ(iqr_rescale(std::vector<double>{7}), (std::vector<double>{0}));
    const auto r = iqr_rescale(std::vector<double>{1, 2, 3, 4, 5});
    const std::vector<double> expected{-1, -0.5, 0, 0.5, 1};
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_DOUBLE_EQ(r[i], expected[i]);
}

// Expected values from numpy.percentile (linear interpolation).
TEST(IqrRescale, MatchesLinearPercentileOracle) {
    const auto r = iqr_rescale(std::vector<double>{3.5, 1.0, 7.25, 2.0, 9.0, 4.0});
    const std::vector<double> expected{-0.06153846153846154, -0.676923076923077, 0.8615384615384616,
                                       -0.4307692307692308, 1.2923076923076924, 0.06153846153846154};
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], expected[i], 1e-15);
}

TEST(IqrRescale, MedianIsZeroWhenIqrPositive) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(10.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> col(1 + rng() % 60);
        for (auto& x : col) x = nd(rng);
        auto out = iqr_rescale(col);
        std::sort(col.begin(), col.end());
        if (!(quantile_linear(col, 0.75) > quantile_linear(col, 0.25))) continue;
        std::sort(out.begin(), out.end());
        EXPECT_NEAR(quantile_linear(out, 0.5), 0.0, 1e-12);
    }
}

// ---- preprocess ------------------------------------------------------------

std::vector<UrlRecord> sample_records() {
    return {{"http://a.com/x", Label::Benign},       {"http://a.com/y", Label::Benign},
            {"http://b.org/login", Label::Malicious}, {"http://b.org/login", Label::Malicious},
            {"https://c.net/?q=1", Label::Benign},    {"http:///", Label::Malicious},
            {"d.io/path/to/page", Label::Malicious},  {"http://192.168.0.1/x.php", Label::Malicious},
            {"e-shop.com/cart", Label::Benign}};
}

TEST(Preprocess, RemovesDuplicatesAndUnparsableRows) {
    const auto ds = preprocess(sample_records(), {.seed = 1});
    EXPECT_EQ(ds.size(), 6u);
    std::set<std::string> hosts;
    for (const auto& r : ds.records) EXPECT_TRUE(hosts.insert(parse_url(r.raw).hostname).second);
    ds.validate();
}

TEST(Preprocess, SameHostnameKeepsFirstOccurrence) {
    const auto ds = preprocess({{"http://a.com/x", Label::Benign}, {"http://a.com/y", Label::Malicious}},
                               {.seed = 0, .scale = false});
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds.records[0].raw, "http://a.com/x");
    EXPECT_EQ(ds.labels[0], Label::Benign);
}

TEST(Preprocess, HostnameDedupCanBeDisabled) {
    const auto ds = preprocess({{"http://a.com/x", Label::Benign}, {"http://a.com/y", Label::Malicious}},
                               {.seed = 0, .scale = false, .dedup_hostnames = false});
    EXPECT_EQ(ds.size(), 2u);
}

TEST(Preprocess, DeterministicAndIdempotent) {
    const PreprocessConfig cfg{.seed = 99};
    const auto a = preprocess(sample_records(), cfg);
    const auto b = preprocess(sample_records(), cfg);
    EXPECT_EQ(a, b);
    const auto again = preprocess(a.records, cfg);
    EXPECT_EQ(again.records, a.records);
    EXPECT_EQ(again.features, a.features);
}

TEST(Preprocess, EmptyInputs) {
    EXPECT_THROW(preprocess({}, {}), EmptyAfterCleaning);
    EXPECT_THROW(preprocess({{"http:///", Label::Benign}}, {}), EmptyAfterCleaning);
}

TEST(Preprocess, UnscaledFeaturesMatchExtraction) {
    const auto ds = preprocess(sample_records(), {.seed = 5, .scale = false});
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto v = extract_features(ds.records[i].raw);
        EXPECT_TRUE(std::equal(v.begin(), v.end(), ds.features.row(i).begin()));
    }
}

// ---- split -----------------------------------------------------------------

TEST(Split, SevenNineTwentyOneOnThousandRows) {
    const auto ds = generate_synthetic(1000, 6.0, 1);
    const auto s = split(ds, 0.79, 11);
    EXPECT_EQ(s.train.size(), 790u);
    EXPECT_EQ(s.test.size(), 210u);
}

TEST(Split, RatioBounds) {
    const auto ds = generate_synthetic(10, 6.0, 1);
    EXPECT_THROW(split(ds, 1.0, 0), RatioError);
    EXPECT_THROW(split(ds, 0.0, 0), RatioError);
    EXPECT_THROW(split(ds, -0.5, 0), RatioError);
    EXPECT_THROW(split(ds.subset(std::vector<std::size_t>{0}, "one"), 0.5, 0), ArgError);
}

TEST(Split, PartitionsExactlyAndDeterministically) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 2 + seed * 7;
        const auto ds = generate_synthetic(n, 2.0, seed);
        const double ratio = 0.05 + 0.03 * static_cast<double>(seed);
        const auto s = split(ds, ratio, seed);
        EXPECT_EQ(s.train.size(), static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9)));
        std::vector<std::size_t> all = s.train_indices;
        all.insert(all.end(), s.test_indices.begin(), s.test_indices.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expected(n);
        std::iota(expected.begin(), expected.end(), std::size_t{0});
        EXPECT_EQ(all, expected);
        EXPECT_EQ(split(ds, ratio, seed).train_indices, s.train_indices);
        for (std::size_t i = 0; i < s.train.size(); ++i) EXPECT_EQ(s.train.labels[i], ds.labels[s.train_indices[i]]);
    }
}

TEST(FractionRounding, IgnoresBinaryRepresentationError) {
    EXPECT_EQ(floor_fraction(0.29, 100), 29u);  // 0.29 * 100 == 28.999999999999996
    EXPECT_EQ(ceil_fraction(0.05, 800), 40u);   // 0.05 * 800 == 40.000000000000007
    EXPECT_EQ(ceil_fraction(0.02, 790), 16u);
    EXPECT_EQ(ceil_fraction(0.0, 790), 0u);
    EXPECT_EQ(ceil_fraction(1.0, 790), 790u);
}

// ---- generate_synthetic ----------------------------------------------------

TEST(GenerateSynthetic, BalancedAndDeterministic) {
    const auto a = generate_synthetic(1000, 6.0, 42);
    EXPECT_EQ(std::count(a.labels.begin(), a.labels.end(), Label::Benign), 500);
    EXPECT_EQ(std::count(a.labels.begin(), a.labels.end(), Label::Malicious), 500);
    EXPECT_EQ(a.dim(), kFeatureCount);
    EXPECT_EQ(a, generate_synthetic(1000, 6.0, 42));
    EXPECT_NE(a.features, generate_synthetic(1000, 6.0, 43).features);
}

TEST(GenerateSynthetic, ClusterMeansNearHalfSeparation) {
    const auto ds = generate_synthetic(4000, 6.0, 8);
    double sum0 = 0, sum1 = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        (ds.labels[i] == Label::Benign ? sum0 : sum1) += ds.features(i, 5);
    EXPECT_NEAR(sum0 / 2000.0, -3.0, 0.1);
    EXPECT_NEAR(sum1 / 2000.0, 3.0, 0.1);
}

TEST(GenerateSynthetic, ArgumentErrors) {
    EXPECT_THROW(generate_synthetic(1, 6.0, 0), ArgError);
    EXPECT_THROW(generate_synthetic(10, 0.0, 0), ArgError);
}

TEST(GenerateSynthetic, WellSeparatedForOneNearestNeighbour) {
    const auto ds = generate_synthetic(1000, 6.0, 2024);
    const auto s = split(ds, 0.79, 1);
    EXPECT_GE(oracle::one_nn_accuracy(s.train, s.test), 0.99);
}

// ---- feature CSV -----------------------------------------------------------

TEST(FeatureCsv, RoundTripsExactly) {
    TempDir dir("fcsv");
    const auto ds = generate_synthetic(57, 1.5, 9);
    write_feature_csv(ds, dir / "f.csv");
    const auto back = read_feature_csv(dir / "f.csv");
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(back.labels, ds.labels);
    EXPECT_EQ(testing_helpers::read_text(dir / "f.csv").substr(0, 12), "f1,f2,f3,f4,");
}

TEST(FeatureCsv, RejectsMalformedFiles) {
    TempDir dir("fcsv");
    write_text(dir / "h.csv", "a,b,label\n1,2,0\n");
    EXPECT_THROW(read_feature_csv(dir / "h.csv"), SchemaError);
    write_text(dir / "n.csv", "f1,f2,label\n1,x,0\n");
    EXPECT_THROW(read_feature_csv(dir / "n.csv"), SchemaError);
    write_text(dir / "l.csv", "f1,f2,label\n1,2,3\n");
    EXPECT_THROW(read_feature_csv(dir / "l.csv"), LabelError);
    write_text(dir / "c.csv", "f1,f2,label\n1,2\n");
    EXPECT_THROW(read_feature_csv(dir / "c.csv"), SchemaError);
}
