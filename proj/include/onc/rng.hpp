#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace onc {

// 64-bit FNV-1a; used for stream keys and config hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based generator. Draw k of stream (seed, name, index) is a pure
/// function of those four values, so every stream can be regenerated
/// independently and in any order. Uniform and exponential variates are
/// produced with explicit formulas, keeping results identical across
/// standard library implementations.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace onc
