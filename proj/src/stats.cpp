#include "lvtopo/stats.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "lvtopo/kernels.hpp"

namespace lvtopo::stats {

CorrelationMatrix correlation(const Matrix& scaled) {
  if (scaled.rows() < 2) throw TooFewSamples("correlation needs >= 2 samples");
  const std::size_t k = scaled.cols();
  const double denom = static_cast<double>(scaled.rows()) - 1.0;
  CorrelationMatrix out;
  out.samples = scaled.rows();
  out.sigma = Matrix(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      double v = kernels::dot(scaled.col(i), scaled.col(j)) / denom;
      out.sigma(i, j) = v;
      out.sigma(j, i) = v;
    }
  return out;
}

PrecisionMatrix precision(const CorrelationMatrix& sigma, double ridge_lambda) {
  if (ridge_lambda < 0) throw std::invalid_argument("ridge must be >= 0");
  const auto k = static_cast<Eigen::Index>(sigma.sigma.rows());
  Eigen::MatrixXd s(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      s(i, j) = sigma.sigma(static_cast<std::size_t>(i), static_cast<std::size_t>(j));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd& w = eig.eigenvalues();

  auto stable = [&](double lambda) {
    double lo = w.minCoeff() + lambda;
    double hi = w.maxCoeff() + lambda;
    return lo > 0 && hi / lo < kConditionLimit;
  };

  double lambda = ridge_lambda;
  if (!stable(lambda)) {
    lambda = std::max(lambda, 1e-10);
    while (!stable(lambda)) {
      lambda *= 10.0;
      if (lambda > kRidgeCeiling) {
        std::ostringstream os;
        os << "correlation matrix stays ill-conditioned at ridge " << kRidgeCeiling;
        throw SingularEvenWithRidge(os.str());
      }
    }
  }

  Eigen::VectorXd inv = (w.array() + lambda).inverse();
  Eigen::MatrixXd theta =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();

  PrecisionMatrix out;
  out.ridge = lambda;
  out.theta = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = 0.5 * (theta(i, j) + theta(j, i));
      out.theta(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
      out.theta(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v;
    }
  return out;
}

DistanceMatrix distances(const PrecisionMatrix& theta) {
  const std::size_t k = theta.theta.rows();
  DistanceMatrix d(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;  // self-distance undefined
      double mag = std::abs(theta.theta(i, j));
      if (mag >= kDependencyCutoff) d.set(i, j, 1.0 / mag);
    }
  return d;
}

}  // namespace lvtopo::stats
