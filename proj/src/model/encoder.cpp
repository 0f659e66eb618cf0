#include "encoder.hpp"

#include <cmath>
#include <numeric>

namespace s2gsl {

void init_encoder_params(ParamStore& params, const EncoderConfig& cfg, std::size_t vocab_size) {
  if (cfg.dim == 0 || cfg.dim % 2 != 0) throw ValidationError("encoder dim must be even and positive");
  params.create("encoder.word_embedding", vocab_size, cfg.dim);
  params.create("encoder.position_embedding", cfg.max_len, cfg.dim);
  if (cfg.aspect_marker) params.create("encoder.aspect_marker", 1, cfg.dim);
  if (cfg.mixing) {
    params.create("encoder.mix.query", cfg.dim, cfg.dim);
    params.create("encoder.mix.key", cfg.dim, cfg.dim);
    params.create("encoder.mix.value", cfg.dim, cfg.dim);
  }
}

std::vector<std::size_t> token_ids(const SentenceRecord& rec, const Vocab& words) {
  std::vector<std::size_t> ids;
  ids.reserve(rec.size());
  for (const auto& t : rec.tokens) ids.push_back(words.id_or(t, 0));
  return ids;
}

Var encode(std::span<const std::size_t> ids, const ParamStore& params, const EncoderConfig& cfg,
           std::optional<Span> aspect) {
  if (ids.empty()) throw ValidationError("cannot encode an empty sentence");
  if (ids.size() > cfg.max_len)
    throw ValidationError("sentence of " + std::to_string(ids.size()) + " tokens exceeds max_len " +
                          std::to_string(cfg.max_len));
  std::vector<std::size_t> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 0);
  Var h = ad::add(ad::gather_rows(params.get("encoder.word_embedding"), ids, false),
                  ad::gather_rows(params.get("encoder.position_embedding"), positions, false));
  if (cfg.aspect_marker) {
    if (!aspect || aspect->first > aspect->last || aspect->last >= ids.size())
      throw ValidationError("aspect marker needs an aspect span inside the sentence");
    std::vector<std::size_t> inside(ids.size(), 0);
    for (std::size_t i = aspect->first; i <= aspect->last; ++i) inside[i] = 1;
    h = ad::add(h, ad::gather_rows(params.get("encoder.aspect_marker"), inside, true));
  }
  if (!cfg.mixing) return h;

  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  Var q = ad::matmul(h, params.get("encoder.mix.query"));
  Var k = ad::matmul(h, params.get("encoder.mix.key"));
  Var v = ad::matmul(h, params.get("encoder.mix.value"));
  Var att = ad::softmax_rows(ad::affine(ad::matmul_nt(q, k), scale));
  return ad::add(h, ad::matmul(att, v));
}

}  // namespace s2gsl
