#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../tensor/errors.hpp"

namespace s2gsl {

enum class Polarity { positive = 0, negative = 1, neutral = 2 };
inline constexpr std::size_t kNumClasses = 3;

const char* polarity_name(Polarity p);
Polarity parse_polarity(const std::string& s);

// One (sentence, aspect) pair. Aspect bounds are 0-based and inclusive;
// dep_head is 1-based with 0 marking the syntactic root.
struct SentenceRecord {
  std::vector<std::string> tokens;
  std::size_t aspect_from = 0;
  std::size_t aspect_to = 0;
  Polarity polarity = Polarity::neutral;
  std::vector<std::size_t> dep_head;
  std::vector<std::string> dep_label;
  std::string constituency;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const SentenceRecord&) const = default;
};

// Throws ValidationError describing the first violated invariant.
void validate_record(const SentenceRecord& rec);

// Tab-separated line format (see README). Parses and validates one record.
SentenceRecord parse_record_line(const std::string& line);
std::string format_record_line(const SentenceRecord& rec);

std::vector<SentenceRecord> load_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<SentenceRecord>& records);

// String -> id table with a reserved id 0. Words map unknowns to 0; labels
// reserve 0 for "no relation" and 1 for unknown labels.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<std::string> entries);

  static Vocab words_from(const std::vector<SentenceRecord>& records);
  static Vocab labels_from(const std::vector<SentenceRecord>& records);

  std::size_t size() const { return entries_.size(); }
  std::optional<std::size_t> find(const std::string& s) const;
  // Falls back to `unknown_id` for missing entries.
  std::size_t id_or(const std::string& s, std::size_t unknown_id) const;
  const std::string& entry(std::size_t id) const { return entries_.at(id); }
  const std::vector<std::string>& entries() const { return entries_; }

  // One entry per line, line number = id.
  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> entries_;
  std::map<std::string, std::size_t> index_;
};

inline constexpr const char* kUnknownWord = "<unk>";
inline constexpr const char* kNoRelation = "<none>";
inline constexpr const char* kUnknownLabel = "<unk>";
inline constexpr std::size_t kUnknownLabelId = 1;

}  // namespace s2gsl
