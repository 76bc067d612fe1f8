#include "pathgls/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "pathgls/error.hpp"

namespace pathgls {

const char* to_string(EntityCategory category) {
  switch (category) {
    case EntityCategory::Morphology: return "morphology";
    case EntityCategory::Diagnosis: return "diagnosis";
    case EntityCategory::Location: return "location";
    case EntityCategory::Marker: return "marker";
    case EntityCategory::Other: return "other";
  }
  return "other";
}

EntityCategory category_from_string(const std::string& name) {
  if (name == "morphology") return EntityCategory::Morphology;
  if (name == "diagnosis") return EntityCategory::Diagnosis;
  if (name == "location") return EntityCategory::Location;
  if (name == "marker") return EntityCategory::Marker;
  if (name == "other") return EntityCategory::Other;
  fail("lexicon-invalid", "unknown entity category: " + name);
}

Lexicon::Lexicon(std::vector<LexiconTerm> terms) : terms_(std::move(terms)) {
  for (auto& t : terms_) {
    require(!t.term.empty(), "lexicon-invalid", "empty lexicon term");
    for (char c : t.term) {
      require(!std::isupper(static_cast<unsigned char>(c)), "lexicon-invalid",
              "lexicon terms must be lowercase: " + t.term);
    }
  }
  // Longest first; ties alphabetical, for a deterministic scan order.
  std::stable_sort(terms_.begin(), terms_.end(), [](const LexiconTerm& a, const LexiconTerm& b) {
    if (a.term.size() != b.term.size()) return a.term.size() > b.term.size();
    return a.term < b.term;
  });
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "file-missing", "cannot open lexicon " + path);
  std::vector<LexiconTerm> terms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, "lexicon-invalid",
            path + ":" + std::to_string(lineno) + ": expected term<TAB>category");
    terms.push_back({line.substr(0, tab), category_from_string(line.substr(tab + 1))});
  }
  require(!terms.empty(), "lexicon-invalid", "lexicon is empty: " + path);
  return Lexicon(std::move(terms));
}

std::vector<LexiconTerm> Lexicon::terms_of(EntityCategory category) const {
  std::vector<LexiconTerm> out;
  for (const auto& t : terms_) {
    if (t.category == category) out.push_back(t);
  }
  return out;
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool matches_at(const std::string& lower_report, std::size_t pos, const std::string& term) {
  if (pos + term.size() > lower_report.size()) return false;
  if (lower_report.compare(pos, term.size(), term) != 0) return false;
  // Word boundaries on both sides.
  if (pos > 0 && is_word_char(lower_report[pos - 1]) && is_word_char(term.front())) return false;
  const std::size_t end = pos + term.size();
  if (end < lower_report.size() && is_word_char(lower_report[end]) && is_word_char(term.back())) {
    return false;
  }
  return true;
}

}  // namespace

ClinicalEntityList extract_entities(const std::string& report, const Lexicon& lexicon) {
  ClinicalEntityList entities;
  if (report.empty() || lexicon.empty()) return entities;

  std::string lower = report;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  std::size_t pos = 0;
  while (pos < lower.size()) {
    bool matched = false;
    for (const auto& t : lexicon.terms()) {  // longest-match order
      if (matches_at(lower, pos, t.term)) {
        entities.push_back(
            {report.substr(pos, t.term.size()), pos, pos + t.term.size(), t.category});
        pos += t.term.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++pos;
  }
  return entities;
}

}  // namespace pathgls
