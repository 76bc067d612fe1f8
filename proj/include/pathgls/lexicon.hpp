#pragma once

#include <string>
#include <vector>

namespace pathgls {

enum class EntityCategory { Morphology, Diagnosis, Location, Marker, Other };

const char* to_string(EntityCategory category);
EntityCategory category_from_string(const std::string& name);

struct LexiconTerm {
  std::string term;  // lowercase surface form
  EntityCategory category;
};

// Term list used by entity extraction. Kept longest-match-sorted so the
// scanner can take the first hit at each position.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<LexiconTerm> terms);

  // UTF-8 TSV, `term<TAB>category`, lowercase terms, one per line.
  static Lexicon load(const std::string& path);

  const std::vector<LexiconTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  std::vector<LexiconTerm> terms_of(EntityCategory category) const;

 private:
  std::vector<LexiconTerm> terms_;
};

struct ClinicalEntity {
  std::string surface;  // as matched, original casing from the report
  std::size_t begin = 0;
  std::size_t end = 0;  // character offsets, [begin, end)
  EntityCategory category = EntityCategory::Other;
};

using ClinicalEntityList = std::vector<ClinicalEntity>;

// Case-insensitive longest-match scan at word boundaries; overlapping
// shorter matches are suppressed; output is in text order.
ClinicalEntityList extract_entities(const std::string& report, const Lexicon& lexicon);

}  // namespace pathgls
