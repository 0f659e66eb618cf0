#include "layers.hpp"

#include <cmath>

namespace s2gsl {

Var masked_softmax(const Var& scores, const Matrix& mask) {
  if (!scores->value.same_shape(mask))
    throw ValidationError("masked_softmax: mask " + mask.shape_str() + " vs scores " + scores->value.shape_str());
  Matrix additive(mask.rows(), mask.cols());
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    bool any_open = false;
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      const double m = mask(r, c);
      if (m == 0.0) {
        any_open = true;
      } else if (std::isinf(m) && m < 0) {
        additive(r, c) = kMaskSentinel;
      } else {
        throw ValidationError("masked_softmax: mask entries must be 0 or -inf, row " + std::to_string(r));
      }
    }
    if (!any_open) throw ValidationError("masked_softmax: row " + std::to_string(r) + " is fully masked");
  }
  return ad::softmax_rows(scores, &additive);
}

Var graph_conv(const Var& adjacency, const Var& h_prev, const Var& weight, const Var& bias, Activation act) {
  const auto n = h_prev->value.rows();
  const auto d = h_prev->value.cols();
  if (adjacency->value.rows() != n || adjacency->value.cols() != n)
    throw ValidationError("graph_conv: adjacency " + adjacency->value.shape_str() + " vs features " +
                          h_prev->value.shape_str());
  if (weight->value.rows() != d || bias->value.rows() != 1 || bias->value.cols() != weight->value.cols())
    throw ValidationError("graph_conv: weight " + weight->value.shape_str() + " / bias " +
                          bias->value.shape_str() + " do not fit features " + h_prev->value.shape_str());
  Var z = ad::add_row_bias(ad::matmul(ad::matmul(adjacency, h_prev), weight), bias);
  return act == Activation::relu ? ad::relu(z) : z;
}

}  // namespace s2gsl
