#ifndef SADDLE_QUADRATIC_HPP
#define SADDLE_QUADRATIC_HPP

#include <Eigen/Core>

namespace saddle {

// x -> 1/2 x'Px + b'x + c with declared curvature bounds. The declared pair
// (mu, L) must bracket the spectrum of P: mu <= lambda_min, L >= lambda_max.
struct QuadraticFunction {
  Eigen::MatrixXd curvature;  // P, symmetric positive semidefinite
  Eigen::VectorXd linear;     // b
  double offset = 0.0;        // c
  double mu = 0.0;
  double L = 0.0;

  int dim() const { return static_cast<int>(curvature.rows()); }
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  // B(u, v) = value(u) - value(v) - <gradient(v), u - v>
  double bregman(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  // Throws std::invalid_argument if the curvature is asymmetric beyond 1e-12
  // (max absolute entry) or (mu, L) conflict with the spectrum beyond a
  // relative 1e-9.
  void validate() const;
};

}  // namespace saddle

#endif
