#include "pathgls/text.hpp"

#include <array>
#include <cctype>

namespace pathgls {

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

namespace {

// Abbreviations whose trailing period is not a sentence boundary.
const std::array<std::string_view, 6> kAbbreviations = {"e.g", "i.e", "cf", "approx", "vs", "et al"};

bool ends_with_abbreviation(std::string_view prefix) {
  // prefix is the sentence text up to (not including) the candidate '.'
  // A trailing single-letter token ("e" of "e.g.", initials) never ends a
  // sentence; this catches the first period of dotted abbreviations.
  if (!prefix.empty() && std::isalpha(static_cast<unsigned char>(prefix.back()))) {
    if (prefix.size() == 1 ||
        !std::isalnum(static_cast<unsigned char>(prefix[prefix.size() - 2]))) {
      return true;
    }
  }
  for (auto abbr : kAbbreviations) {
    if (prefix.size() < abbr.size()) continue;
    std::string_view tail = prefix.substr(prefix.size() - abbr.size());
    bool match = true;
    for (std::size_t i = 0; i < abbr.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(tail[i])) != abbr[i]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    // must be a word start
    if (prefix.size() > abbr.size()) {
      unsigned char before = static_cast<unsigned char>(prefix[prefix.size() - abbr.size() - 1]);
      if (std::isalnum(before)) continue;
    }
    return true;
  }
  return false;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<Sentence> split_sentences(std::string_view report) {
  std::vector<Sentence> sentences;
  std::string current;
  auto flush = [&] {
    std::string t = trim(current);
    if (!t.empty()) sentences.push_back({std::move(t), sentences.size()});
    current.clear();
  };
  for (std::size_t i = 0; i < report.size(); ++i) {
    const char c = report[i];
    if (c == ';' || c == '\n') {
      flush();
    } else if (c == '.') {
      if (ends_with_abbreviation(current)) {
        current.push_back(c);
      } else {
        flush();
      }
    } else {
      current.push_back(c);
    }
  }
  flush();
  return sentences;
}

}  // namespace pathgls
