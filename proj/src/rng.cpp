#include "onc/rng.hpp"

#include <cmath>

#include "onc/errors.hpp"

namespace onc {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::string_view stream, std::uint64_t index)
    : key_(splitmix64(splitmix64(seed) ^ fnv1a(stream)) ^ splitmix64(index + 0x632be59bd9b4e019ULL)) {}

std::uint64_t CounterRng::next_u64() {
  // Two rounds decorrelate neighbouring counters under the same key.
  return splitmix64(splitmix64(key_ + counter_++) ^ key_);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double CounterRng::exponential(double rate) {
  if (!(rate > 0.0)) throw ConfigurationError("exponential rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

Eigen::VectorXd CounterRng::uniform_vector(Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
  return v;
}

Eigen::MatrixXd CounterRng::uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo,
                                           double hi) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
  return m;
}

}  // namespace onc
