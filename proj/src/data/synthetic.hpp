#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "record.hpp"

namespace s2gsl {

struct SyntheticLexicon {
  std::vector<std::string> aspects;
  std::vector<std::string> determiners;
  std::vector<std::string> verbs;
  std::vector<std::string> connectors;
  // Indexed by Polarity.
  std::array<std::vector<std::string>, kNumClasses> opinions;

  static const SyntheticLexicon& standard();
};

struct SyntheticOptions {
  std::size_t min_clauses = 1;
  std::size_t max_clauses = 3;
};

// Planted-structure corpus: each clause is "det aspect verb opinion", clauses
// joined by connectors, one record per aspect. A record's label is the
// polarity of the opinion word inside its own clause; other clauses in the
// same sentence carry different polarities.
std::vector<SentenceRecord> generate_synthetic(std::uint64_t seed, std::size_t size,
                                               const SyntheticLexicon& lex = SyntheticLexicon::standard(),
                                               const SyntheticOptions& opts = {});

}  // namespace s2gsl
