#include "inspect.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace s2gsl {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ValidationError("output directory " + dir.string() + " cannot be created");
  const auto probe = dir / ".s2gsl_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ValidationError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

Matrix head_mean(const std::vector<Var>& heads) {
  Matrix m(heads.front()->value.rows(), heads.front()->value.cols());
  for (const auto& h : heads) add_inplace(m, h->value, 1.0 / static_cast<double>(heads.size()));
  return m;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& m) {
  if (!header.empty() && header.size() != m.cols())
    throw ValidationError("csv header has " + std::to_string(header.size()) + " columns, matrix has " +
                          std::to_string(m.cols()));
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  if (!header.empty()) out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt(m(r, c));
    out << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const Matrix& m, std::size_t cell) {
  const std::size_t w = m.cols() * cell, h = m.rows() * cell;
  double lo = 0.0, hi = 0.0;
  if (m.size()) {
    lo = *std::min_element(m.data().begin(), m.data().end());
    hi = *std::max_element(m.data().begin(), m.data().end());
  }
  const double range = hi > lo ? hi - lo : 1.0;
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << w << ' ' << h << "\n255\n";
  std::vector<unsigned char> row(w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double t = (m(y / cell, x / cell) - lo) / range;
      // Dark = high weight.
      row[x] = static_cast<unsigned char>(255.0 - 255.0 * std::clamp(t, 0.0, 1.0) + 0.5);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(w));
  }
}

std::vector<std::filesystem::path> inspect_record(const Model& model, const SentenceRecord& rec, std::size_t record_id,
                                                  const std::filesystem::path& out_dir) {
  const PreparedRecord prep = model.prepare(rec);
  const ForwardResult f = model.forward(prep);
  prepare_dir(out_dir);

  std::vector<std::filesystem::path> written;
  const std::string stem = "record" + std::to_string(record_id) + "_";
  auto emit = [&](const std::string& name, const std::vector<std::string>& header, const Matrix& m, bool image) {
    written.push_back(out_dir / (stem + name + ".csv"));
    write_csv(written.back(), header, m);
    if (image) {
      written.push_back(out_dir / (stem + name + ".pgm"));
      write_pgm(written.back(), m);
    }
  };

  const auto& tokens = rec.tokens;
  if (f.sesg) {
    for (std::size_t h = 0; h < f.sesg->attention.probs.size(); ++h)
      emit("sesg_head" + std::to_string(h + 1), tokens, f.sesg->attention.probs[h]->value, true);
    emit("segment_mask", tokens, f.sesg->mask->value, true);
  }
  if (f.sylg) {
    emit("sylg_marginals", tokens, f.sylg->tree.marginals->value, true);
    emit("root_probs", tokens, f.sylg->tree.root_probs->value.transpose(), false);
  }
  if (f.alpha) emit("alpha", {"semantic_guided", "syntactic_guided", "balance"}, f.alpha->value, false);
  for (std::size_t k = 0; k < prep.signal.layers.size(); ++k)
    emit("seg_layer" + std::to_string(k + 1), tokens, prep.signal.layers[k], true);
  return written;
}

bool root_in_aspect(const ForwardResult& f, const PreparedRecord& rec) {
  if (!f.sylg) throw ValidationError("root probabilities need the syntactic branch");
  const Matrix& p = f.sylg->tree.root_probs->value;
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.rows(); ++i)
    if (p[i] > p[best]) best = i;
  return best >= rec.aspect.first && best <= rec.aspect.last;
}

bool attention_in_segment(const ForwardResult& f, const PreparedRecord& rec, std::size_t layer) {
  if (!f.sesg) throw ValidationError("segment attention needs the semantic branch");
  if (layer == 0 || layer > rec.signal.layers.size()) throw ValidationError("constituent layer out of range");
  const Matrix att = head_mean(f.sesg->attention.probs);
  const Matrix& seg = rec.signal.layers[layer - 1];
  std::vector<double> col(att.cols(), 0.0);
  for (std::size_t i = rec.aspect.first; i <= rec.aspect.last; ++i)
    for (std::size_t j = 0; j < att.cols(); ++j) col[j] += att(i, j);
  const std::size_t best = static_cast<std::size_t>(std::max_element(col.begin(), col.end()) - col.begin());
  return seg(rec.aspect.first, best) == 1.0;
}

}  // namespace s2gsl
