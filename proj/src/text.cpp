#include "granalign/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace granalign::text {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a",     "an",    "the",   "of",    "to",    "in",    "on",    "at",    "for",
        "from",  "with",  "by",    "and",   "or",    "but",   "is",    "are",   "was",
        "were",  "be",    "been",  "being", "am",    "it",    "its",   "this",  "that",
        "these", "those", "as",    "into",  "onto",  "up",    "down",  "out",   "off",
        "over",  "then",  "than",  "there", "their", "his",   "her",   "he",    "she",
        "they",  "them",  "we",    "you",   "i",     "me",    "my",    "our",   "your",
        "while", "during", "has",  "have",  "had",   "do",    "does",  "did",   "some",
        "very",  "so",    "just",  "who",   "which", "what",  "where", "when",  "about",
        "around", "s",
    };
    return words;
}

}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) {
            ++i;
        }
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) {
            ++j;
        }
        if (j > i) {
            out.emplace_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string normalize_token(std::string_view token) {
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && is_punct(token[b])) {
        ++b;
    }
    while (e > b && is_punct(token[e - 1])) {
        --e;
    }
    return to_lower(token.substr(b, e - b));
}

std::vector<std::string> normalized_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& raw : split_whitespace(s)) {
        auto tok = normalize_token(raw);
        if (!tok.empty()) {
            out.push_back(std::move(tok));
        }
    }
    return out;
}

bool is_stopword(std::string_view normalized_token) {
    return stopwords().contains(normalized_token);
}

bool contains_case_insensitive(std::string_view haystack, std::string_view needle) {
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) {
        ++b;
    }
    while (e > b && is_space(s[e - 1])) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

std::uint64_t stable_hash(std::uint64_t seed, std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_byte = [&h](unsigned char b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (int i = 0; i < 8; ++i) {
        mix_byte(static_cast<unsigned char>(seed >> (8 * i)));
    }
    for (char c : data) {
        mix_byte(static_cast<unsigned char>(c));
    }
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

}  // namespace granalign::text
