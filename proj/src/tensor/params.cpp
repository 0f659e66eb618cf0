#include "params.hpp"

namespace s2gsl {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SeededStream::SeededStream(std::uint64_t seed, const std::string& tag) {
  std::uint64_t s = seed ^ fnv1a(tag);
  state_ = splitmix(s);
}

std::uint64_t SeededStream::next_u64() { return splitmix(state_); }

double SeededStream::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t SeededStream::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  // rejection sampling keeps the draw unbiased
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

const Var& ParamStore::create(const std::string& name, std::size_t rows, std::size_t cols, Init init) {
  if (params_.count(name)) throw ValidationError("duplicate parameter name: " + name);
  Matrix m(rows, cols);
  switch (init) {
    case Init::uniform: {
      SeededStream stream(seed_, "param:" + name);
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = stream.uniform(-kInitRange, kInitRange);
      break;
    }
    case Init::zeros:
      break;
    case Init::ones:
      m.fill(1.0);
      break;
  }
  return params_.emplace(name, parameter(std::move(m))).first->second;
}

const Var& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("unknown parameter: " + name);
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [k, _] : params_) out.push_back(k);
  return out;
}

std::size_t ParamStore::count_scalars() const {
  std::size_t n = 0;
  for (const auto& [_, v] : params_) n += v->value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, v] : params_) v->zero_grad();
}

}  // namespace s2gsl
