#include "synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "../tensor/params.hpp"

namespace s2gsl {

const SyntheticLexicon& SyntheticLexicon::standard() {
  static const SyntheticLexicon lex{
      {"food", "service", "staff", "atmosphere", "price", "menu", "wine", "decor", "music", "location", "dessert",
       "pizza"},
      {"the", "our", "this"},
      {"is", "was", "seemed", "looked"},
      {"and", "but", "while", "whereas"},
      {{{"great", "excellent", "delicious", "friendly", "superb"},
        {"terrible", "awful", "rude", "bland", "horrible"},
        {"average", "ordinary", "okay", "standard", "acceptable"}}},
  };
  return lex;
}

namespace {

template <typename T>
const T& pick(SeededStream& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

struct Clause {
  std::string det, aspect, verb, opinion;
  Polarity polarity;
};

}  // namespace

std::vector<SentenceRecord> generate_synthetic(std::uint64_t seed, std::size_t size, const SyntheticLexicon& lex,
                                               const SyntheticOptions& opts) {
  if (size < 1) throw ValidationError("synthetic corpus size must be >= 1");
  if (opts.min_clauses < 1 || opts.max_clauses < opts.min_clauses || opts.max_clauses > kNumClasses)
    throw ValidationError("synthetic clause range must satisfy 1 <= min <= max <= 3");
  if (lex.aspects.size() < opts.max_clauses) throw ValidationError("lexicon has too few aspects");

  SeededStream rng(seed, "synthetic");
  std::array<std::size_t, kNumClasses> counts{};
  std::vector<SentenceRecord> out;
  out.reserve(size);

  while (out.size() < size) {
    const std::size_t k = opts.min_clauses + rng.below(opts.max_clauses - opts.min_clauses + 1);

    // Least-used classes first keeps labels balanced; random tie-break.
    std::array<std::size_t, kNumClasses> order{};
    std::iota(order.begin(), order.end(), 0);
    std::array<std::uint64_t, kNumClasses> tie{};
    for (auto& t : tie) t = rng.next_u64();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return counts[a] != counts[b] ? counts[a] < counts[b] : tie[a] < tie[b];
    });

    std::vector<std::string> aspects = lex.aspects;
    std::vector<Clause> clauses;
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t ai = rng.below(aspects.size());
      const auto pol = static_cast<Polarity>(order[c]);
      clauses.push_back(Clause{pick(rng, lex.determiners), aspects[ai], pick(rng, lex.verbs),
                               pick(rng, lex.opinions[order[c]]), pol});
      aspects.erase(aspects.begin() + static_cast<std::ptrdiff_t>(ai));
    }
    // Clause order is independent of polarity order.
    for (std::size_t i = clauses.size(); i > 1; --i) std::swap(clauses[i - 1], clauses[rng.below(i)]);

    std::vector<std::string> tokens, labels;
    std::vector<std::size_t> heads;
    std::vector<std::size_t> aspect_pos;
    std::ostringstream parse;
    parse << "(ROOT (S";
    std::size_t first_opinion = 0;  // 1-based
    for (std::size_t c = 0; c < k; ++c) {
      const Clause& cl = clauses[c];
      const std::size_t base = tokens.size();
      const std::size_t opinion_id = base + (c == 0 ? 4 : 5);  // 1-based index of this clause's opinion
      if (c > 0) {
        const std::string& conn = pick(rng, lex.connectors);
        tokens.push_back(conn);
        heads.push_back(opinion_id);
        labels.push_back("cc");
        parse << " (CC " << conn << ")";
      }
      const std::size_t start = tokens.size();
      tokens.insert(tokens.end(), {cl.det, cl.aspect, cl.verb, cl.opinion});
      heads.insert(heads.end(), {start + 2, start + 4, start + 4, c == 0 ? 0 : first_opinion});
      labels.insert(labels.end(), {"det", "nsubj", "cop", c == 0 ? "root" : "conj"});
      if (c == 0) first_opinion = start + 4;
      aspect_pos.push_back(start + 1);
      parse << " (CL (NP (DT " << cl.det << ") (NN " << cl.aspect << ")) (VP (VB " << cl.verb << ") (JJ "
            << cl.opinion << ")))";
    }
    parse << "))";

    for (std::size_t c = 0; c < k && out.size() < size; ++c) {
      SentenceRecord rec;
      rec.tokens = tokens;
      rec.aspect_from = rec.aspect_to = aspect_pos[c];
      rec.polarity = clauses[c].polarity;
      rec.dep_head = heads;
      rec.dep_label = labels;
      rec.constituency = parse.str();
      ++counts[static_cast<std::size_t>(rec.polarity)];
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace s2gsl
