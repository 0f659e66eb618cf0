#include <cmath>

#include "model/fusion.hpp"
#include "support.hpp"
#include "tensor/gradcheck.hpp"

using namespace s2gsl;
using test::check_close;
using test::random_matrix;

namespace {

FusionConfig small(std::size_t dim, std::size_t heads) {
  FusionConfig c;
  c.dim = dim;
  c.heads = heads;
  c.ffn_hidden = 2 * dim;
  return c;
}

Matrix layer_norm_ref(const Matrix& x, const Matrix& gain, const Matrix& offset, double eps) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mu = 0, var = 0;
    for (std::size_t c = 0; c < x.cols(); ++c) mu += x(r, c) / x.cols();
    for (std::size_t c = 0; c < x.cols(); ++c) var += (x(r, c) - mu) * (x(r, c) - mu) / x.cols();
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mu) / std::sqrt(var + eps) * gain[c] + offset[c];
  }
  return out;
}

Matrix add_bias(Matrix m, const Matrix& b) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) += b[c];
  return m;
}

Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(perm[r], c);
  return out;
}

// Attention query/key gradients here are around 1e-6, where central
// differences at h = 1e-5 carry ~1e-10 of rounding noise. A larger floor
// turns the relative test into an absolute one at 1e-8 for those entries.
const GradCheckOptions kNoiseFloor{1e-5, 1e-4, 1e-4, {}};

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("layer norm rows have zero mean and unit variance") {
  const Matrix x = random_matrix(4, 6, 1, -3, 3);
  const Matrix y = ad::layer_norm_rows(constant(x), constant(Matrix(1, 6, 1.0)), constant(Matrix(1, 6)), 0.0)->value;
  for (std::size_t r = 0; r < 4; ++r) {
    double mu = 0, var = 0;
    for (std::size_t c = 0; c < 6; ++c) mu += y(r, c) / 6;
    for (std::size_t c = 0; c < 6; ++c) var += (y(r, c) - mu) * (y(r, c) - mu) / 6;
    CHECK(std::abs(mu) <= 1e-10);
    CHECK(std::abs(var - 1.0) <= 1e-10);
  }
  // Positive rescaling of a row leaves the normalized row unchanged.
  Matrix scaled = x;
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= 7.5;
  const Matrix y2 =
      ad::layer_norm_rows(constant(scaled), constant(Matrix(1, 6, 1.0)), constant(Matrix(1, 6)), 0.0)->value;
  check_close(y, y2, 1e-12);
}

TEST_CASE("a single token cross stream matches the closed form") {
  const FusionConfig cfg = small(4, 2);
  ParamStore ps(3);
  init_cross_stream_params(ps, "x", cfg);
  for (const char* n : {"x.ln1.gain", "x.ln1.offset", "x.ln2.gain", "x.ln2.offset"})
    ps.get(n)->value = random_matrix(1, 4, std::string(n).size(), 0.5, 1.5);
  const Matrix q = random_matrix(1, 4, 10), kv = random_matrix(1, 4, 11);
  const Matrix out = cross_stream(constant(q), constant(kv), ps, "x", cfg)->value;

  auto p = [&](const char* n) { return ps.get(std::string("x.") + n)->value; };
  // One key: attention weight 1, so each head returns its value slice.
  Matrix o = matmul(matmul(kv, p("attn.value")), p("attn.output"));
  add_inplace(o, q);
  o = layer_norm_ref(o, p("ln1.gain"), p("ln1.offset"), cfg.ln_eps);
  Matrix hidden = add_bias(matmul(o, p("ffn.w1")), p("ffn.b1"));
  for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::max(0.0, hidden[i]);
  Matrix f = add_bias(matmul(hidden, p("ffn.w2")), p("ffn.b2"));
  add_inplace(f, o);
  check_close(out, layer_norm_ref(f, p("ln2.gain"), p("ln2.offset"), cfg.ln_eps), 1e-12);
}

TEST_CASE("cross stream is equivariant under joint row permutation") {
  const FusionConfig cfg = small(4, 2);
  ParamStore ps(4);
  init_cross_stream_params(ps, "x", cfg);
  const Matrix q = random_matrix(4, 4, 12), kv = random_matrix(4, 4, 13);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  const Matrix a = permute_rows(cross_stream(constant(q), constant(kv), ps, "x", cfg)->value, perm);
  const Matrix b = cross_stream(constant(permute_rows(q, perm)), constant(permute_rows(kv, perm)), ps, "x", cfg)->value;
  check_close(a, b, 1e-12);
}

TEST_CASE("cross stream gradient") {
  const FusionConfig cfg = small(8, 2);
  ParamStore ps(5);
  init_cross_stream_params(ps, "x", cfg);
  Var q = ps.create("q", 3, 8), kv = ps.create("kv", 3, 8);
  const Matrix probe = random_matrix(3, 8, 14);
  CHECK(grad_check([&] { return ad::sum(ad::mul_const(cross_stream(q, kv, ps, "x", cfg), probe)); }, ps, kNoiseFloor).passed);
  CHECK_THROWS_AS(init_cross_stream_params(ps, "y", small(8, 3)), ValidationError);
}

TEST_CASE("balance channel probes") {
  const FusionConfig cfg = small(3, 1);
  ParamStore ps(6);
  init_balance_params(ps, cfg);
  const Var sem = constant(random_matrix(4, 3, 15)), syn = constant(random_matrix(4, 3, 16));
  CHECK(balance_channel(sem, syn, ps)->value.rows() == 4);
  CHECK(balance_channel(sem, syn, ps)->value.cols() == 3);

  for (auto& [name, p] : ps.all()) p->value.fill(0);
  CHECK(balance_channel(sem, syn, ps)->value == Matrix(4, 3));

  // [I; -I] first layer: equal streams cancel before the relu.
  Matrix w1(6, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    w1(i, i) = 1.0;
    w1(i + 3, i) = -1.0;
  }
  ps.get("fusion.balance.w1")->value = w1;
  ps.get("fusion.balance.w2")->value = Matrix::identity(3);
  CHECK(balance_channel(sem, sem, ps)->value == Matrix(4, 3));
}

TEST_CASE("stream weights") {
  FusionConfig cfg = small(3, 1);
  ParamStore ps(7);
  init_stream_weight_params(ps, cfg);
  const Var x = constant(random_matrix(4, 3, 17));
  const Matrix same = stream_weights(x, x, x, ps, cfg)->value;
  for (std::size_t i = 0; i < 3; ++i) CHECK(same[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));

  // Pooled scores (1, 0, 0) after the relu.
  ps.get("fusion.score.weight")->value = Matrix{{1}, {0}, {0}};
  ps.get("fusion.score.bias")->value.fill(0);
  const Var x1 = constant(Matrix{{0.5, 9, 9}, {1.5, -9, 9}});
  const Var x2 = constant(Matrix{{0.0, 1, 1}, {0.0, 2, 2}});
  const Var x3 = constant(Matrix{{-1.0, 1, 1}, {-3.0, 2, 2}});
  const Matrix a = stream_weights(x1, x2, x3, ps, cfg)->value;
  const double e = std::exp(1.0);
  CHECK(a[0] == doctest::Approx(e / (e + 2)).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(1 / (e + 2)).epsilon(1e-15));
  CHECK(a[2] == doctest::Approx(1 / (e + 2)).epsilon(1e-15));
  CHECK(a[0] == doctest::Approx(0.576).epsilon(1e-3));
  CHECK(a[1] == doctest::Approx(0.212).epsilon(1e-2));

  ps.get("fusion.score.bias")->value.fill(-100);
  const Matrix floor = stream_weights(x1, x2, x3, ps, cfg)->value;
  for (std::size_t i = 0; i < 3; ++i) CHECK(floor[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));

  // First-row pooling reads only row 0: x1 row 0 scores 0.5.
  cfg.pool = PoolMode::first_row;
  ps.get("fusion.score.bias")->value.fill(0);
  const Matrix first = stream_weights(x1, x2, x3, ps, cfg)->value;
  const double eh = std::exp(0.5);
  CHECK(first[0] == doctest::Approx(eh / (eh + 2)).epsilon(1e-15));
}

TEST_CASE("fuse scales and concatenates") {
  const Var x1 = constant(random_matrix(2, 3, 18)), x2 = constant(random_matrix(2, 3, 19)),
            x3 = constant(random_matrix(2, 3, 20));
  const Matrix f = fuse(x1, x2, x3, constant(Matrix{{1, 0, 0}}))->value;
  REQUIRE(f.cols() == 9);
  CHECK(f.rows() == 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 9; ++c) CHECK(f(r, c) == (c < 3 ? x1->value(r, c) : 0.0));
  CHECK_THROWS_AS(fuse(x1, x2, x3, constant(Matrix{{1, 0}})), ValidationError);
}

TEST_CASE("full adaptive fusion gradient") {
  const FusionConfig cfg = small(8, 2);
  ParamStore ps(8);
  init_fusion_params(ps, cfg);
  Var sem = ps.create("sem", 4, 8), syn = ps.create("syn", 4, 8);
  const Matrix probe = random_matrix(4, 24, 21);
  const auto r = grad_check(
      [&] {
        FusionOutput f = adaptive_fusion(sem, syn, ps, cfg);
        return ad::sum(ad::mul_const(f.fused, probe));
      },
      ps, kNoiseFloor);
  CHECK(r.passed);
  const FusionOutput f = adaptive_fusion(sem, syn, ps, cfg);
  CHECK(f.alpha->value.sum() == doctest::Approx(1.0).epsilon(1e-15));
  for (double a : f.alpha->value.data()) CHECK(a >= 0.0);
}

TEST_CASE("alternative fusions") {
  const FusionConfig cfg = small(3, 1);
  ParamStore ps(9);
  init_gate_params(ps, cfg);
  const Var sem = constant(random_matrix(2, 3, 22)), syn = constant(random_matrix(2, 3, 23));
  CHECK(fuse_alternative(FusionMode::sum, sem, constant(Matrix(2, 3)), ps)->value == sem->value);
  CHECK(fuse_alternative(FusionMode::concat, sem, syn, ps)->value.cols() == 6);

  ps.get("fusion.gate.weight")->value.fill(0);
  ps.get("fusion.gate.bias")->value.fill(0);
  const Matrix g = fuse_alternative(FusionMode::gate, sem, syn, ps)->value;
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(g[i] == doctest::Approx(0.5 * (sem->value[i] + syn->value[i])).epsilon(1e-15));

  CHECK_THROWS_AS(fuse_alternative(FusionMode::adaptive, sem, syn, ps), ValidationError);
  CHECK_THROWS_AS(parse_fusion_mode("average"), ValidationError);
  for (FusionMode m : {FusionMode::adaptive, FusionMode::concat, FusionMode::sum, FusionMode::gate})
    CHECK(parse_fusion_mode(fusion_mode_name(m)) == m);
}

TEST_CASE("gate fusion gradient") {
  const FusionConfig cfg = small(4, 1);
  ParamStore ps(10);
  init_gate_params(ps, cfg);
  Var sem = ps.create("sem", 3, 4), syn = ps.create("syn", 3, 4);
  const Matrix probe = random_matrix(3, 4, 24);
  CHECK(grad_check([&] { return ad::sum(ad::mul_const(fuse_alternative(FusionMode::gate, sem, syn, ps), probe)); }, ps)
            .passed);
}

}  // TEST_SUITE
