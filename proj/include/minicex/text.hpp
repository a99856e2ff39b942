#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace minicex::text {

/// Decodes one UTF-8 code point starting at `pos` and advances `pos`.
/// Invalid bytes decode as U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& pos);

bool is_cjk(char32_t cp);
bool is_word_char(char32_t cp);
bool is_space(char32_t cp);

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);

}  // namespace minicex::text
