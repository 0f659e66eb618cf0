#pragma once

#include <span>
#include <vector>

#include <optional>

#include "../data/record.hpp"
#include "../data/tree.hpp"
#include "../tensor/params.hpp"

namespace s2gsl {

// Trainable stand-in for a pretrained contextual encoder: word embedding plus
// learned position embedding, optionally followed by one residual
// self-attention mixing layer.
struct EncoderConfig {
  std::size_t dim = 32;
  std::size_t max_len = 64;
  bool mixing = false;
  // Add a learned marker vector to the aspect rows, so token states depend on
  // which aspect is being classified (the role of sentence-pair packing in a
  // pretrained encoder).
  bool aspect_marker = true;
};

void init_encoder_params(ParamStore& params, const EncoderConfig& cfg, std::size_t vocab_size);

std::vector<std::size_t> token_ids(const SentenceRecord& rec, const Vocab& words);

// Returns H^c, n x dim. `aspect` is required when the marker is enabled and
// ignored otherwise.
Var encode(std::span<const std::size_t> ids, const ParamStore& params, const EncoderConfig& cfg,
           std::optional<Span> aspect = std::nullopt);

}  // namespace s2gsl
