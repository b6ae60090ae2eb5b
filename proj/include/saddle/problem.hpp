#ifndef SADDLE_PROBLEM_HPP
#define SADDLE_PROBLEM_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "saddle/quadratic.hpp"
#include "saddle/rng.hpp"

namespace saddle {

// Spectral constants of the coupling matrix A:
//   L_xy^2  >= lambda_max(A'A),
//   mu_xy^2 <= lambda_min(AA')  (lambda_min^+ when range_g_in_A),
//   mu_yx^2 <= lambda_min(A'A)  (lambda_min^+ when range_f_in_At).
struct SpectralConstants {
  double L_xy = 0.0;
  double mu_xy = 0.0;
  double mu_yx = 0.0;
  bool range_g_in_A = false;
  bool range_f_in_At = false;
};

enum class NoiseModel { none, gaussian_isotropic };

struct StochasticOracleSpec {
  std::vector<double> sigma_f2;  // per-node variance bound for grad f_i
  std::vector<double> sigma_g2;  // per-node variance bound for grad g_i
  NoiseModel model = NoiseModel::none;

  double global_sigma_f2() const;  // (1/n) sum_i sigma_{f,i}^2
  double global_sigma_g2() const;
};

// Averaged constants over nodes plus the worst-case local ones.
struct ProblemConstants {
  double L_x = 0.0, mu_x = 0.0, L_y = 0.0, mu_y = 0.0;      // arithmetic means
  double L_lx = 0.0, mu_lx = 0.0, L_ly = 0.0, mu_ly = 0.0;  // max / min
};

struct GroundTruth {
  Eigen::VectorXd x_star;
  Eigen::VectorXd y_star;
  double residual = 0.0;  // max KKT residual after the direct solve
};

// min_x max_y (1/n) sum_i f_i(x) + y'Ax - g_i(y)
struct SaddlePointProblem {
  std::vector<QuadraticFunction> f;  // per node, over dim_x
  std::vector<QuadraticFunction> g;  // per node, over dim_y
  Eigen::MatrixXd coupling;          // A, dim_y x dim_x
  StochasticOracleSpec noise;
  bool range_g_in_A = false;
  bool range_f_in_At = false;

  int nodes() const { return static_cast<int>(f.size()); }
  int dim_x() const { return static_cast<int>(coupling.cols()); }
  int dim_y() const { return static_cast<int>(coupling.rows()); }

  ProblemConstants constants() const;
  QuadraticFunction averaged_f() const;  // (1/n) sum_i f_i
  QuadraticFunction averaged_g() const;

  // Checks dimensions, per-function declarations, noise sizes, and that at
  // least one node is strongly convex in each block.
  void validate() const;
};

SpectralConstants compute_spectral_constants(const Eigen::MatrixXd& A,
                                             bool range_g_in_A,
                                             bool range_f_in_At);

Eigen::VectorXd exact_gradient_f(const SaddlePointProblem& problem, int node,
                                 const Eigen::VectorXd& x);
Eigen::VectorXd exact_gradient_g(const SaddlePointProblem& problem, int node,
                                 const Eigen::VectorXd& y);

// Batched unbiased gradient estimate. The returned vector is the mean of
// `batch` independent samples with per-sample second moment sigma_{f,i}^2;
// the batch mean is drawn from its exact Gaussian law.
Eigen::VectorXd stochastic_gradient_f(const SaddlePointProblem& problem,
                                      int node, const Eigen::VectorXd& x,
                                      NoiseStream& stream, long batch);
Eigen::VectorXd stochastic_gradient_g(const SaddlePointProblem& problem,
                                      int node, const Eigen::VectorXd& y,
                                      NoiseStream& stream, long batch);

// Direct solution of the stationarity system
//   [P_f  A'] [x*]   [-b_f]
//   [A  -P_g] [y*] = [ b_g]
// for the averaged objectives. Throws on a singular system.
GroundTruth solve_ground_truth(const SaddlePointProblem& problem);

// Consensus-induced inexact first-order model at the column mean of X.
struct ConsensusModel {
  double value = 0.0;
  Eigen::VectorXd gradient;
  double delta = 0.0;
};

// Requires ||X - Xbar||_F^2 <= delta_prime. The returned triple is a
// (delta, 2L_g, mu_g/2)-model of the averaged objective at xbar with
//   delta = (1/2n)(L_l^2/L_g + 2L_l^2/mu_g + L_l - mu_l) delta'.
ConsensusModel consensus_model_of_f(const SaddlePointProblem& problem,
                                    const Eigen::MatrixXd& X,
                                    double delta_prime);
ConsensusModel consensus_model_of_g(const SaddlePointProblem& problem,
                                    const Eigen::MatrixXd& Y,
                                    double delta_prime);

struct GeneratorSpec {
  int n = 1;
  int dim_x = 2;
  int dim_y = 2;
  double mu_x = 1.0, L_x = 1.0;
  double mu_y = 1.0, L_y = 1.0;
  double L_xy = 1.0;
  double coupling_span = 2.0;  // sigma_max / sigma_min of the coupling
  double sigma_f2 = 0.0;       // uniform per-node variance bounds
  double sigma_g2 = 0.0;
  double heterogeneity = 0.0;  // relative spread of per-node constants
  std::uint64_t seed = 0;
};

// Random instance with eigenvalue-shaped quadratics; realized global
// constants match the targets (exactly for heterogeneity 0, within rounding
// otherwise).
SaddlePointProblem generate_problem(const GeneratorSpec& spec);

}  // namespace saddle

#endif
