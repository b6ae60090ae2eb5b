#include "saddle/quadratic.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace saddle {

double QuadraticFunction::value(const Eigen::VectorXd& x) const {
  if (x.size() != curvature.rows())
    throw std::invalid_argument("quadratic value: dimension mismatch");
  return 0.5 * x.dot(curvature * x) + linear.dot(x) + offset;
}

Eigen::VectorXd QuadraticFunction::gradient(const Eigen::VectorXd& x) const {
  if (x.size() != curvature.rows())
    throw std::invalid_argument("quadratic gradient: dimension mismatch");
  return curvature * x + linear;
}

double QuadraticFunction::bregman(const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v) const {
  Eigen::VectorXd d = u - v;
  return 0.5 * d.dot(curvature * d);
}

void QuadraticFunction::validate() const {
  if (curvature.rows() == 0 || curvature.rows() != curvature.cols())
    throw std::invalid_argument("quadratic: curvature must be square and non-empty");
  if (linear.size() != curvature.rows())
    throw std::invalid_argument("quadratic: linear term dimension mismatch");
  const double asym = (curvature - curvature.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12)
    throw std::invalid_argument("quadratic: curvature asymmetric beyond 1e-12");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(curvature,
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  const double scale = std::max(1.0, std::abs(hi));
  if (mu > lo + 1e-9 * scale)
    throw std::invalid_argument("quadratic: declared mu exceeds lambda_min");
  if (L < hi - 1e-9 * scale)
    throw std::invalid_argument("quadratic: declared L below lambda_max");
  if (mu < 0.0 || L <= 0.0 || mu > L)
    throw std::invalid_argument("quadratic: need 0 <= mu <= L, L > 0");
}

}  // namespace saddle
