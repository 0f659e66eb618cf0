#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "../tensor/matrix.hpp"
#include "record.hpp"

namespace s2gsl {

// Inclusive token span.
struct Span {
  std::size_t first = 0;
  std::size_t last = 0;
  bool operator==(const Span&) const = default;
};

struct TreeNode {
  std::string label;
  Span span;
  std::size_t depth = 1;  // root is 1
  std::vector<std::size_t> children;
  bool is_leaf() const { return children.empty(); }
};

// Phrase-structure tree over whitespace tokens. A preterminal such as
// "(NN food)" is a leaf node covering one token; the word itself is not a
// separate node.
class ConstituentTree {
 public:
  ConstituentTree() = default;
  ConstituentTree(std::vector<TreeNode> nodes, std::vector<std::string> words);

  const TreeNode& root() const { return nodes_.front(); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t num_tokens() const { return words_.size(); }
  std::size_t max_depth() const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::string> words_;
};

ConstituentTree parse_bracketed_tree(std::string_view text);

// Horizontal cut at `layer` (root = 1). Leaves shallower than the layer keep
// contributing their own span.
std::vector<Span> layer_segments(const ConstituentTree& tree, std::size_t layer);

// Binary layers x n x n, one n x n slice per constituent layer 1..layers.
struct SegmentSignal {
  std::vector<Matrix> layers;
};

SegmentSignal build_segment_signal(const ConstituentTree& tree, std::size_t layers);

// Symmetric matrix of dependency-label ids; 0 marks unlinked pairs.
struct RelationMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> ids;  // row-major n x n
  std::size_t at(std::size_t i, std::size_t j) const { return ids[i * n + j]; }
};

RelationMatrix build_relation_matrix(const SentenceRecord& rec, const Vocab& labels);

}  // namespace s2gsl
