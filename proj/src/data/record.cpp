#include "record.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tree.hpp"

namespace s2gsl {

const char* polarity_name(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
  }
  return "?";
}

Polarity parse_polarity(const std::string& s) {
  if (s == "positive") return Polarity::positive;
  if (s == "negative") return Polarity::negative;
  if (s == "neutral") return Polarity::neutral;
  throw ValidationError("unknown polarity '" + s + "'");
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::size_t parse_index(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ValidationError(std::string("invalid ") + what + " '" + s + "'");
  return static_cast<std::size_t>(std::stoull(s));
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

}  // namespace

void validate_record(const SentenceRecord& rec) {
  const std::size_t n = rec.tokens.size();
  if (n == 0) throw ValidationError("record has no tokens");
  if (rec.aspect_from > rec.aspect_to || rec.aspect_to >= n)
    throw ValidationError("aspect span [" + std::to_string(rec.aspect_from) + ", " + std::to_string(rec.aspect_to) +
                          "] out of range for " + std::to_string(n) + " tokens");
  if (rec.dep_head.size() != n) throw ValidationError("dep_head length does not match token count");
  if (rec.dep_label.size() != n) throw ValidationError("dep_label length does not match token count");
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rec.dep_head[i] > n) throw ValidationError("dep_head value out of range at token " + std::to_string(i));
    if (rec.dep_head[i] == i + 1) throw ValidationError("token " + std::to_string(i) + " is its own head");
    if (rec.dep_head[i] == 0) ++roots;
  }
  if (roots != 1) throw ValidationError("expected exactly one root token, found " + std::to_string(roots));
  const ConstituentTree tree = parse_bracketed_tree(rec.constituency);
  if (tree.num_tokens() != n)
    throw ValidationError("constituency parse has " + std::to_string(tree.num_tokens()) + " leaves for " +
                          std::to_string(n) + " tokens");
}

SentenceRecord parse_record_line(const std::string& raw) {
  std::string line = raw;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto fields = split(line, '\t');
  if (fields.size() != 7)
    throw ValidationError("expected 7 tab-separated fields, found " + std::to_string(fields.size()));
  SentenceRecord rec;
  rec.tokens = split_ws(fields[0]);
  rec.aspect_from = parse_index(fields[1], "aspect_from");
  rec.aspect_to = parse_index(fields[2], "aspect_to");
  rec.polarity = parse_polarity(fields[3]);
  for (const auto& h : split_ws(fields[4])) rec.dep_head.push_back(parse_index(h, "dep_head"));
  rec.dep_label = split_ws(fields[5]);
  rec.constituency = fields[6];
  validate_record(rec);
  return rec;
}

std::string format_record_line(const SentenceRecord& rec) {
  std::ostringstream os;
  os << join(rec.tokens) << '\t' << rec.aspect_from << '\t' << rec.aspect_to << '\t' << polarity_name(rec.polarity)
     << '\t' << join(rec.dep_head) << '\t' << join(rec.dep_label) << '\t' << rec.constituency;
  return os.str();
}

std::vector<SentenceRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset " + path.string());
  std::vector<SentenceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    try {
      out.push_back(parse_record_line(line));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<SentenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset " + path.string());
  for (const auto& r : records) out << format_record_line(r) << '\n';
}

Vocab::Vocab(std::vector<std::string> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i], i).second) throw ValidationError("duplicate vocabulary entry '" + entries_[i] + "'");
  }
}

Vocab Vocab::words_from(const std::vector<SentenceRecord>& records) {
  std::set<std::string> seen;
  for (const auto& r : records) seen.insert(r.tokens.begin(), r.tokens.end());
  seen.erase(kUnknownWord);
  std::vector<std::string> entries{kUnknownWord};
  entries.insert(entries.end(), seen.begin(), seen.end());
  return Vocab(std::move(entries));
}

Vocab Vocab::labels_from(const std::vector<SentenceRecord>& records) {
  std::set<std::string> seen;
  for (const auto& r : records) seen.insert(r.dep_label.begin(), r.dep_label.end());
  seen.erase(kNoRelation);
  seen.erase(kUnknownLabel);
  std::vector<std::string> entries{kNoRelation, kUnknownLabel};
  entries.insert(entries.end(), seen.begin(), seen.end());
  return Vocab(std::move(entries));
}

std::optional<std::size_t> Vocab::find(const std::string& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocab::id_or(const std::string& s, std::size_t unknown_id) const {
  return find(s).value_or(unknown_id);
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open vocabulary " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    entries.push_back(line);
  }
  return Vocab(std::move(entries));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write vocabulary " + path.string());
  for (const auto& e : entries_) out << e << '\n';
}

}  // namespace s2gsl
