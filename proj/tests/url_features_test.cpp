#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lfshield/errors.hpp"
#include "lfshield/url_features.hpp"

using namespace lfshield;

TEST(ParseUrl, SplitsSchemeHostPathQuery) {
    const auto p = parse_url("http://example.com/a?b=1");
    EXPECT_EQ(p, (UrlParts{"http", "example.com", "/a", "b=1"}));
}

TEST(ParseUrl, DefaultsSchemeToHttp) {
    EXPECT_EQ(parse_url("example.com"), (UrlParts{"http", "example.com", "", ""}));
}

TEST(ParseUrl, LowercasesHostAndDropsPortUserinfoFragment) {
    const auto p = parse_url("  HTTPS://user:pw@WWW.Example.COM:8443/Path/x?q=1&r=2#frag ");
    EXPECT_EQ(p.scheme, "https");
    EXPECT_EQ(p.hostname, "www.example.com");
    EXPECT_EQ(p.path, "/Path/x");
    EXPECT_EQ(p.query, "q=1&r=2");
}

TEST(ParseUrl, QueryWithoutPath) {
    const auto p = parse_url("example.com?x=1");
    EXPECT_EQ(p.hostname, "example.com");
    EXPECT_EQ(p.path, "");
    EXPECT_EQ(p.query, "x=1");
}

TEST(ParseUrl, RejectsMissingHostname) {
    EXPECT_THROW(parse_url("http:///"), MalformedUrl);
    EXPECT_THROW(parse_url("   "), MalformedUrl);
    EXPECT_THROW(parse_url("/just/a/path"), MalformedUrl);
}

TEST(CharEntropy, ReferenceValues) {
    EXPECT_EQ(char_entropy("aaaa"), 0.0);
    EXPECT_FALSE(std::signbit(char_entropy("aaaa")));
    EXPECT_DOUBLE_EQ(char_entropy("ab"), 1.0);
    EXPECT_DOUBLE_EQ(char_entropy("abcd"), 2.0);
}

TEST(ExtractFeatures, HandCountedExample) {
    const auto v = extract_features("http://example.com/a?b=1");
    EXPECT_EQ(v[index_of(Feature::UrlLength)], 24);
    EXPECT_EQ(v[index_of(Feature::HostnameLength)], 11);
    EXPECT_EQ(v[index_of(Feature::DotCount)], 1);
    EXPECT_EQ(v[index_of(Feature::DigitCount)], 1);
}

// Frozen column order. Entropy from an independent Counter-based computation.
TEST(ExtractFeatures, GoldenVector) {
    const FeatureVector expected = {24, 11, 2, 1, 16, 7, 1, 0, 3, 1, 0, 3, 1.0 / 24.0, 3.9701755214643453, 0, 0};
    const auto v = extract_features("http://example.com/a?b=1");
    for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_DOUBLE_EQ(v[i], expected[i]) << feature_names()[i];
    EXPECT_EQ(feature_names()[0], "url_length");
    EXPECT_EQ(feature_names()[15], "uses_https");
}

TEST(ExtractFeatures, IpHostAndHttps) {
    const auto v = extract_features("https://1.2.3.4/");
    EXPECT_EQ(v[index_of(Feature::HasIpHostname)], 1.0);
    EXPECT_EQ(v[index_of(Feature::UsesHttps)], 1.0);
    EXPECT_EQ(v[index_of(Feature::SubdomainCount)], 0.0);
    EXPECT_EQ(v[index_of(Feature::TldLength)], 0.0);
}

TEST(ExtractFeatures, SubdomainsAndQueryParams) {
    const auto v = extract_features("login.secure.bank-example.co.uk/x?a=1&&b=2&");
    EXPECT_EQ(v[index_of(Feature::SubdomainCount)], 3.0);
    EXPECT_EQ(v[index_of(Feature::TldLength)], 2.0);
    EXPECT_EQ(v[index_of(Feature::QueryParamCount)], 2.0);
    EXPECT_EQ(v[index_of(Feature::HyphenCount)], 1.0);
    EXPECT_EQ(v[index_of(Feature::UsesHttps)], 0.0);
}

TEST(IsIpv4Literal, Boundaries) {
    EXPECT_TRUE(is_ipv4_literal("255.255.255.255"));
    EXPECT_FALSE(is_ipv4_literal("256.1.1.1"));
    EXPECT_FALSE(is_ipv4_literal("1.2.3"));
    EXPECT_FALSE(is_ipv4_literal("1.2.3.4.5"));
    EXPECT_FALSE(is_ipv4_literal("1..3.4"));
}

TEST(ExtractFeatures, PropertiesOnRandomUrls) {
    std::mt19937 rng(7);
    const std::string alphabet = "abcxyz0123456789-._~/?=&%";
    for (int trial = 0; trial < 500; ++trial) {
        std::string url = (trial % 2 ? "https://" : "");
        url += "h" + std::to_string(trial) + ".example.org/";
        const int len = static_cast<int>(rng() % 40);
        for (int i = 0; i < len; ++i) url.push_back(alphabet[rng() % alphabet.size()]);

        const auto v = extract_features(url);
        EXPECT_EQ(v, extract_features(url));  // deterministic, bit-identical
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            ASSERT_TRUE(std::isfinite(v[i]));
            ASSERT_GE(v[i], 0.0);
        }
        for (auto f : {Feature::UrlLength, Feature::DigitCount, Feature::LetterCount, Feature::DotCount,
                       Feature::SlashCount, Feature::QueryParamCount})
            EXPECT_EQ(v[index_of(f)], std::floor(v[index_of(f)]));
        EXPECT_LE(v[index_of(Feature::DigitRatio)], 1.0);
        EXPECT_LE(v[index_of(Feature::CharEntropy)], std::log2(v[index_of(Feature::UrlLength)]) + 1e-12);
        EXPECT_EQ(v[index_of(Feature::DigitCount)] + v[index_of(Feature::LetterCount)] +
                      v[index_of(Feature::SpecialCharCount)],
                  v[index_of(Feature::UrlLength)]);
    }
}
