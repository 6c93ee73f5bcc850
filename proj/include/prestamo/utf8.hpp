#ifndef PRESTAMO_UTF8_HPP_
#define PRESTAMO_UTF8_HPP_

#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 handling. Case classification covers ASCII, Latin-1
// Supplement and Latin Extended-A, which is what Spanish newswire needs;
// other code points are treated as uncased.
namespace prestamo::utf8 {

/// Decodes UTF-8; invalid bytes decode to U+FFFD one byte at a time.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

bool is_space(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_digit(char32_t cp);
bool is_alnum(char32_t cp);

char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view text);

bool contains_space(std::string_view text);

/// Splits on runs of Unicode whitespace.
std::vector<std::string> split_whitespace(std::string_view text);

/// Collapses whitespace runs to single spaces and trims both ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace prestamo::utf8

#endif  // PRESTAMO_UTF8_HPP_
