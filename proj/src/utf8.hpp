#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 and Latin-script character handling. Letters are ASCII plus
// the Latin-1 Supplement and Latin Extended-A/B blocks, which covers the
// Portuguese/Spanish/French orthography found in the corpora we target.
namespace topicnav::utf8 {

/// Decodes `text`, silently dropping malformed byte sequences.
std::u32string decode(std::string_view text);
void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);
std::size_t length(std::string_view text);

bool is_letter(char32_t cp) noexcept;
bool is_digit(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;
/// C0/C1 controls and DEL, excluding tab, newline and carriage return.
bool is_control(char32_t cp) noexcept;
char32_t to_lower(char32_t cp) noexcept;
/// Maps an accented Latin letter to its unaccented base letter.
char32_t strip_diacritic(char32_t cp) noexcept;

}  // namespace topicnav::utf8
