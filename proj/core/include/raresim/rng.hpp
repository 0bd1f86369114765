#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace raresim {

/// Seeded stream of standard normal / uniform variates.
///
/// Identical seed gives an identical stream, so every estimator run is
/// reproducible bit for bit. Each worker or repetition owns its own stream;
/// there is no shared state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  double normal() { return normal_(engine_); }

  double uniform() { return uniform_(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  /// Row-major fill so that samples are contiguous per draw.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

 private:
  // splitmix64 finalizer; decorrelates consecutive integer seeds.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace raresim
