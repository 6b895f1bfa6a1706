#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mtbreak::text {

// Decodes UTF-8 into code points. Invalid sequences become U+FFFD, one per
// offending byte.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view code_points);
void append_utf8(std::string& out, char32_t code_point);

// Whitespace as Python's str.split() sees it (Unicode White_Space plus the
// ASCII information separators U+001C..U+001F).
bool is_space(char32_t c) noexcept;

// str.split() with no separator.
std::vector<std::u32string> split_whitespace(std::u32string_view s);
// str.rstrip() with no argument.
std::u32string_view rstrip(std::u32string_view s);
// Removes every whitespace code point (''.join(s.split())).
std::u32string remove_whitespace(std::u32string_view s);

bool is_blank(std::string_view utf8);

}  // namespace mtbreak::text
