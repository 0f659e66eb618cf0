#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "training.hpp"

namespace s2gsl {

// Writes CSV matrices and PGM heatmaps for one record into `out_dir`:
// per-head segment attention, segment mask, latent-tree marginals, root
// probabilities, stream weights and the per-layer segment signal. Branches
// removed by the ablation are skipped. Returns the written paths in order.
std::vector<std::filesystem::path> inspect_record(const Model& model, const SentenceRecord& rec, std::size_t record_id,
                                                  const std::filesystem::path& out_dir);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& m);
// Greyscale heatmap, one `cell` x `cell` block per entry, scaled to the
// matrix's own [min, max].
void write_pgm(const std::filesystem::path& path, const Matrix& m, std::size_t cell = 12);

// argmax of the root distribution lies inside the aspect span.
bool root_in_aspect(const ForwardResult& f, const PreparedRecord& rec);

// Column of the largest head-averaged segment attention from the aspect rows
// lies inside the aspect's own segment at constituent `layer`.
bool attention_in_segment(const ForwardResult& f, const PreparedRecord& rec, std::size_t layer);

}  // namespace s2gsl
