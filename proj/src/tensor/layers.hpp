#pragma once

#include "autodiff.hpp"

namespace s2gsl {

// Row softmax under a {0, -inf} additive mask. -inf cells come out exactly 0.
// Throws ValidationError naming the first fully masked row.
Var masked_softmax(const Var& scores, const Matrix& mask);

enum class Activation { relu, identity };

// act(A * H * W + b), b broadcast over rows.
Var graph_conv(const Var& adjacency, const Var& h_prev, const Var& weight, const Var& bias,
               Activation act = Activation::relu);

}  // namespace s2gsl
