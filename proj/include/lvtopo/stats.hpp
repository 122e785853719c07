#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lvtopo/matrix.hpp"

namespace lvtopo::stats {

struct TooFewSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularEvenWithRidge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorrelationMatrix {
  Matrix sigma;  // k x k, symmetric
  std::size_t samples = 0;
};

struct PrecisionMatrix {
  Matrix theta;       // k x k, symmetric
  double ridge = 0.0; // regularization actually applied
};

// Pairwise 1/|theta_ij| distances. Entries with |theta_ij| below the
// dependency cutoff carry no finite distance; comparisons treat them as
// larger than every finite distance.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t k) : values_(k, k), finite_(k * k, 0) {}

  std::size_t size() const { return values_.rows(); }
  bool finite(std::size_t i, std::size_t j) const {
    return finite_[i * size() + j] != 0;
  }
  double at(std::size_t i, std::size_t j) const { return values_(i, j); }
  void set(std::size_t i, std::size_t j, double v) {
    values_(i, j) = v;
    finite_[i * size() + j] = 1;
  }
  // true when (i,j) is strictly closer than (a,b); infinite sorts last
  bool closer(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const {
    bool f1 = finite(i, j), f2 = finite(a, b);
    if (f1 != f2) return f1;
    if (!f1) return false;
    return at(i, j) < at(a, b);
  }
  bool within(std::size_t i, std::size_t j, double threshold) const {
    return finite(i, j) && at(i, j) <= threshold;
  }

 private:
  Matrix values_;
  std::vector<std::uint8_t> finite_;
};

// sigma = X^T X / (n - 1) for column-centered X (standard scaling has
// already centered it). Exactly symmetric by construction.
CorrelationMatrix correlation(const Matrix& scaled);

// theta = (sigma + lambda I)^-1. If the requested lambda leaves the matrix
// with condition number >= 1e12 (or non-positive spectrum), lambda
// escalates by x10 from 1e-10; exhausted at 1e-2.
PrecisionMatrix precision(const CorrelationMatrix& sigma, double ridge_lambda = 0.0);

DistanceMatrix distances(const PrecisionMatrix& theta);

inline constexpr double kConditionLimit = 1e12;
inline constexpr double kRidgeCeiling = 1e-2;
inline constexpr double kDependencyCutoff = 1e-12;

}  // namespace lvtopo::stats
