#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace granalign::text {

/// Splits on ASCII whitespace; no normalization.
std::vector<std::string> split_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

/// Lowercases and strips leading/trailing ASCII punctuation.
std::string normalize_token(std::string_view token);

/// Normalized, non-empty tokens of `s`.
std::vector<std::string> normalized_tokens(std::string_view s);

bool is_stopword(std::string_view normalized_token);

bool contains_case_insensitive(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Stable 64-bit hash (FNV-1a followed by a splitmix64 finalizer).
std::uint64_t stable_hash(std::uint64_t seed, std::string_view data);

}  // namespace granalign::text
