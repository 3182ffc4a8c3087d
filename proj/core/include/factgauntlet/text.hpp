#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace factgauntlet::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

/// Whitespace-separated words.
std::vector<std::string_view> words(std::string_view s);
std::size_t word_count(std::string_view s);

/// Keeps the first `max_words` whitespace tokens, re-joined by single spaces.
/// Text already within the cap is returned trimmed but otherwise untouched.
std::string truncate_words(std::string_view s, std::size_t max_words);

/// Lowercased maximal runs of ASCII letters and digits. Bytes >= 0x80 are
/// treated as letters so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view s);

std::string join(std::span<const std::string> parts, std::string_view sep);

bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept;
bool contains_icase(std::string_view haystack, std::string_view needle);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ParseError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view encoded);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t value);

/// File-system safe rendering of an id ('/' and other separators become '_').
std::string file_safe(std::string_view id);

}  // namespace factgauntlet::text
