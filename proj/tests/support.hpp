#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

namespace testing {

// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  crossdiff::Point unit_vector() {
    const double a = uniform(0.0, 2.0 * M_PI);
    return {std::cos(a), std::sin(a)};
  }
  // Random tensor with a positive-definite symmetric part.
  crossdiff::CrossTensor elliptic_tensor() {
    const double a = uniform(0.5, 2.0), d = uniform(0.5, 2.0);
    const double skew = uniform(-1.0, 1.0);
    const double sym = uniform(-0.4, 0.4) * std::sqrt(a * d);
    return crossdiff::CrossTensor::matrix(a, sym + skew, sym - skew, d);
  }

 private:
  std::mt19937_64 rng_;
};

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("crossdiff_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace testing
