#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace lfshield {

struct UrlParts {
    std::string scheme;
    std::string hostname;
    std::string path;
    std::string query;

    bool operator==(const UrlParts&) const = default;
};

inline constexpr std::size_t kFeatureCount = 16;

using FeatureVector = std::array<double, kFeatureCount>;

// Frozen column order of FeatureVector. Reordering breaks stored datasets.
enum class Feature : std::size_t {
    UrlLength,
    HostnameLength,
    PathLength,
    DigitCount,
    LetterCount,
    SpecialCharCount,
    DotCount,
    HyphenCount,
    SlashCount,
    QueryParamCount,
    SubdomainCount,
    TldLength,
    DigitRatio,
    CharEntropy,
    HasIpHostname,
    UsesHttps,
};

constexpr std::size_t index_of(Feature f) noexcept { return static_cast<std::size_t>(f); }

const std::array<std::string_view, kFeatureCount>& feature_names();

/// Splits a URL into scheme, hostname, path and query. A missing scheme
/// defaults to "http"; userinfo, port and fragment are dropped and the
/// hostname is lowercased. Throws MalformedUrl when no hostname is found.
UrlParts parse_url(std::string_view raw);

/// Shannon entropy (bits) of the byte frequency distribution of `raw`.
double char_entropy(std::string_view raw);

/// Dotted-quad IPv4 literal with every octet in [0, 255].
bool is_ipv4_literal(std::string_view host);

/// Lexical feature vector of a URL. Counts are taken over the trimmed raw
/// string; see `Feature` for the column order.
FeatureVector extract_features(std::string_view raw);

}  // namespace lfshield
