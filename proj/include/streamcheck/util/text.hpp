#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace streamcheck::text {

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Lowercased word tokens; a word is a maximal run of ASCII alphanumerics or
// non-ASCII bytes (so UTF-8 letters stay inside their word).
std::vector<std::string> words(std::string_view s);

// Word n-gram shingles. A text with fewer than n words yields a single
// shingle of all its words; an empty text yields none.
std::set<std::string> shingles(std::string_view s, std::size_t n = 3);

// |A ∩ B| / |A ∪ B|; two empty sets have similarity 0.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Truncates at a UTF-8 code point boundary so the result is at most
// max_bytes long.
std::string utf8_truncate(std::string_view s, std::size_t max_bytes);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view encoded);

}  // namespace streamcheck::text
