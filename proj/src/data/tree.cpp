#include "tree.hpp"

#include <algorithm>
#include <cctype>

namespace s2gsl {

ConstituentTree::ConstituentTree(std::vector<TreeNode> nodes, std::vector<std::string> words)
    : nodes_(std::move(nodes)), words_(std::move(words)) {}

std::size_t ConstituentTree::max_depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

namespace {

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  ConstituentTree parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ValidationError("empty constituency parse");
    if (text_[pos_] != '(') throw ValidationError("constituency parse must start with '('");
    parse_node(1);
    skip_ws();
    if (pos_ != text_.size())
      throw ValidationError("trailing text after constituency parse at offset " + std::to_string(pos_));
    return ConstituentTree(std::move(nodes_), std::move(words_));
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Expects text_[pos_] == '('.
  std::size_t parse_node(std::size_t depth) {
    ++pos_;
    const std::size_t self = nodes_.size();
    nodes_.push_back(TreeNode{});
    nodes_[self].depth = depth;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') nodes_[self].label = atom();

    std::vector<std::size_t> kids;
    const std::size_t first_tok = words_.size();
    bool has_subnode = false;
    // A lone bare word makes this node a preterminal.
    struct Pending {
      bool is_word;
      std::size_t index;  // token index for words, node index otherwise
    };
    std::vector<Pending> pending;
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size()) throw ValidationError("unbalanced parentheses in constituency parse");
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        has_subnode = true;
        pending.push_back({false, parse_node(depth + 1)});
      } else {
        pending.push_back({true, words_.size()});
        words_.push_back(atom());
      }
    }

    const bool preterminal = !has_subnode && pending.size() == 1;
    if (pending.empty()) throw ValidationError("empty constituent '(" + nodes_[self].label + ")'");
    if (preterminal) {
      nodes_[self].span = {first_tok, first_tok};
      return self;
    }
    for (const auto& p : pending) {
      if (p.is_word) {
        nodes_.push_back(TreeNode{"", {p.index, p.index}, depth + 1, {}});
        kids.push_back(nodes_.size() - 1);
      } else {
        kids.push_back(p.index);
      }
    }
    if (words_.size() == first_tok) throw ValidationError("constituent without tokens");
    nodes_[self].span = {first_tok, words_.size() - 1};
    nodes_[self].children = std::move(kids);
    return self;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<std::string> words_;
};

void collect_segments(const ConstituentTree& tree, std::size_t idx, std::size_t layer, std::vector<Span>& out) {
  const TreeNode& node = tree.nodes()[idx];
  if (node.depth == layer || node.is_leaf()) {
    out.push_back(node.span);
    return;
  }
  for (std::size_t c : node.children) collect_segments(tree, c, layer, out);
}

}  // namespace

ConstituentTree parse_bracketed_tree(std::string_view text) { return BracketParser(text).parse(); }

std::vector<Span> layer_segments(const ConstituentTree& tree, std::size_t layer) {
  if (layer < 1) throw ValidationError("constituent layer must be >= 1");
  std::vector<Span> out;
  collect_segments(tree, 0, layer, out);
  return out;
}

SegmentSignal build_segment_signal(const ConstituentTree& tree, std::size_t layers) {
  if (layers < 1) throw ValidationError("segment signal needs at least one layer");
  const std::size_t n = tree.num_tokens();
  SegmentSignal sig;
  for (std::size_t k = 1; k <= layers; ++k) {
    Matrix m(n, n);
    for (const Span& s : layer_segments(tree, k))
      for (std::size_t i = s.first; i <= s.last; ++i)
        for (std::size_t j = s.first; j <= s.last; ++j) m(i, j) = 1.0;
    sig.layers.push_back(std::move(m));
  }
  return sig;
}

RelationMatrix build_relation_matrix(const SentenceRecord& rec, const Vocab& labels) {
  const std::size_t n = rec.size();
  RelationMatrix r{n, std::vector<std::size_t>(n * n, 0)};
  for (std::size_t dep = 0; dep < n; ++dep) {
    const std::size_t head = rec.dep_head[dep];
    if (head == 0) continue;
    const std::size_t id = labels.id_or(rec.dep_label[dep], kUnknownLabelId);
    r.ids[(head - 1) * n + dep] = id;
    r.ids[dep * n + (head - 1)] = id;
  }
  return r;
}

}  // namespace s2gsl
