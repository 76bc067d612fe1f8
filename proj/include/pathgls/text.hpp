#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pathgls {

// Canonical text form used everywhere text is hashed, embedded, or compared:
// case-folded, whitespace collapsed to single spaces, trimmed. Input is
// expected to be NFC UTF-8; only ASCII letters are folded.
std::string normalize_text(std::string_view text);

// Lowercase alphanumeric word tokens of the normalized text.
std::vector<std::string> tokenize_words(std::string_view text);

struct Sentence {
  std::string text;   // trimmed sentence text, terminal punctuation stripped
  std::size_t index;  // 0-based position in the report
};

// Splits on '.', ';' and newlines, with a guard list for common
// abbreviations (e.g., cf., approx.) so they do not end a sentence.
std::vector<Sentence> split_sentences(std::string_view report);

}  // namespace pathgls
