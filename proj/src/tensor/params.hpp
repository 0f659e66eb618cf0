#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "autodiff.hpp"

namespace s2gsl {

enum class Init { uniform, zeros, ones };

// Named trainable parameters. Each parameter is initialized from its own
// random stream derived from (seed, name), so adding or removing a parameter
// never perturbs the others.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  const Var& create(const std::string& name, std::size_t rows, std::size_t cols, Init init = Init::uniform);
  const Var& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  // Sorted by name.
  const std::map<std::string, Var>& all() const { return params_; }
  std::vector<std::string> names() const;
  std::uint64_t seed() const { return seed_; }

  std::size_t count_scalars() const;
  void zero_grad();

 private:
  std::uint64_t seed_;
  std::map<std::string, Var> params_;
};

// Deterministic stream for one named purpose; output is independent of the
// standard library's distribution implementations.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, const std::string& tag);
  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double next_unit();
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

inline constexpr double kInitRange = 0.1;

}  // namespace s2gsl
