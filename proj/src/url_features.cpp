#include "lfshield/url_features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lfshield/errors.hpp"

namespace lfshield {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
    static constexpr std::array<std::string_view, kFeatureCount> names = {
        "url_length",        "hostname_length", "path_length",       "digit_count",
        "letter_count",      "special_char_count", "dot_count",      "hyphen_count",
        "slash_count",       "query_param_count", "subdomain_count", "tld_length",
        "digit_ratio",       "char_entropy",    "has_ip_hostname",   "uses_https",
    };
    return names;
}

UrlParts parse_url(std::string_view raw) {
    std::string_view s = trim(raw);
    if (s.empty()) throw MalformedUrl("empty URL");

    UrlParts parts;
    if (const auto sep = s.find("://"); sep != std::string_view::npos && valid_scheme(s.substr(0, sep))) {
        parts.scheme = to_lower(s.substr(0, sep));
        s.remove_prefix(sep + 3);
    } else {
        parts.scheme = "http";
    }

    const auto authority_end = s.find_first_of("/?#");
    std::string_view authority = s.substr(0, authority_end);
    std::string_view rest = authority_end == std::string_view::npos ? std::string_view{} : s.substr(authority_end);

    if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
    if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        const auto port = authority.substr(colon + 1);
        if (std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); }))
            authority = authority.substr(0, colon);
    }
    if (authority.empty()) throw MalformedUrl("no hostname in URL '" + std::string(raw) + "'");
    parts.hostname = to_lower(authority);

    if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    const auto q = rest.find('?');
    parts.path = std::string(rest.substr(0, q));
    if (q != std::string_view::npos) parts.query = std::string(rest.substr(q + 1));
    return parts;
}

double char_entropy(std::string_view raw) {
    if (raw.empty()) return 0.0;
    std::array<std::size_t, 256> counts{};
    for (unsigned char c : raw) ++counts[c];
    const double n = static_cast<double>(raw.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    // Single-symbol strings give -1 * log2(1) = -0.0.
    return h == 0.0 ? 0.0 : h;
}

bool is_ipv4_literal(std::string_view host) {
    int octets = 0;
    while (true) {
        const auto dot = host.find('.');
        const auto part = host.substr(0, dot);
        if (part.empty() || part.size() > 3) return false;
        int value = 0;
        for (unsigned char c : part) {
            if (!std::isdigit(c)) return false;
            value = value * 10 + (c - '0');
        }
        if (value > 255) return false;
        ++octets;
        if (dot == std::string_view::npos) break;
        host.remove_prefix(dot + 1);
    }
    return octets == 4;
}

FeatureVector extract_features(std::string_view raw) {
    const std::string_view url = trim(raw);
    const UrlParts parts = parse_url(url);

    std::size_t digits = 0, letters = 0, special = 0, dots = 0, hyphens = 0, slashes = 0;
    for (unsigned char c : url) {
        if (std::isdigit(c)) {
            ++digits;
        } else if (std::isalpha(c)) {
            ++letters;
        } else {
            ++special;
            if (c == '.') ++dots;
            if (c == '-') ++hyphens;
            if (c == '/') ++slashes;
        }
    }

    std::size_t params = 0;
    {
        std::string_view q = parts.query;
        while (!q.empty()) {
            const auto amp = q.find('&');
            if (!q.substr(0, amp).empty()) ++params;
            if (amp == std::string_view::npos) break;
            q.remove_prefix(amp + 1);
        }
    }

    const bool ip_host = is_ipv4_literal(parts.hostname);
    std::size_t subdomains = 0, tld_len = 0;
    if (!ip_host) {
        const auto labels = static_cast<std::size_t>(std::count(parts.hostname.begin(), parts.hostname.end(), '.')) + 1;
        subdomains = labels > 2 ? labels - 2 : 0;
        const auto last_dot = parts.hostname.rfind('.');
        tld_len = last_dot == std::string::npos ? 0 : parts.hostname.size() - last_dot - 1;
    }

    FeatureVector v{};
    auto set = [&v](Feature f, double value) { v[index_of(f)] = value; };
    set(Feature::UrlLength, static_cast<double>(url.size()));
    set(Feature::HostnameLength, static_cast<double>(parts.hostname.size()));
    set(Feature::PathLength, static_cast<double>(parts.path.size()));
    set(Feature::DigitCount, static_cast<double>(digits));
    set(Feature::LetterCount, static_cast<double>(letters));
    set(Feature::SpecialCharCount, static_cast<double>(special));
    set(Feature::DotCount, static_cast<double>(dots));
    set(Feature::HyphenCount, static_cast<double>(hyphens));
    set(Feature::SlashCount, static_cast<double>(slashes));
    set(Feature::QueryParamCount, static_cast<double>(params));
    set(Feature::SubdomainCount, static_cast<double>(subdomains));
    set(Feature::TldLength, static_cast<double>(tld_len));
    set(Feature::DigitRatio, static_cast<double>(digits) / static_cast<double>(url.size()));
    set(Feature::CharEntropy, char_entropy(url));
    set(Feature::HasIpHostname, ip_host ? 1.0 : 0.0);
    set(Feature::UsesHttps, parts.scheme == "https" ? 1.0 : 0.0);
    return v;
}

}  // namespace lfshield
