#ifndef SADDLE_APDG_HPP
#define SADDLE_APDG_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "saddle/problem.hpp"

namespace saddle {

// Parameter regimes of the accelerated primal-dual method. Each regime
// exploits a different subset of the curvature constants:
//   A: mu_x, mu_y          B: mu_x, mu_xy        C: mu_y, mu_yx
//   D: mu_xy, mu_yx
// Constants a regime does not exploit enter its formulas as zero.
enum class Regime { A, B, C, D };

const char* regime_name(Regime r);

struct SolverConstants {
  double mu_x = 0.0, L_x = 0.0;
  double mu_y = 0.0, L_y = 0.0;
  double L_xy = 0.0;
  double mu_xy = 0.0, mu_yx = 0.0;
};

SolverConstants solver_constants(const ProblemConstants& pc,
                                 const SpectralConstants& sc);
// The (mu/2, 2L) substitution used when the oracle is an averaged
// consensus model rather than the exact gradient.
SolverConstants hatted_constants(const SolverConstants& c);

struct ApdgParameters {
  double eta_x = 0.0, eta_y = 0.0;
  double alpha_x = 0.0, alpha_y = 0.0;
  double beta_x = 0.0, beta_y = 0.0;
  double tau_x = 0.0, tau_y = 0.0;
  double sigma_x = 0.0, sigma_y = 0.0;
  double theta = 0.0;  // contraction factor, theta = 1 - rho
  double omega = 0.0;  // primal/dual step-size balance
  double rho = 0.0;
  Regime regime = Regime::A;
  SolverConstants effective;  // constants the regime actually used
};

bool regime_feasible(const SolverConstants& c, Regime r);
ApdgParameters select_parameters(const SolverConstants& c, Regime r);
// Picks the feasible regime with the largest contraction margin rho,
// preferring A > B > C > D on ties.
ApdgParameters select_parameters_auto(const SolverConstants& c);

struct SolverState {
  Eigen::VectorXd x, x_f;
  Eigen::VectorXd y, y_f, y_prev;
  long k = 0;

  // x_f = x, y_f = y_prev = y at k = 0.
  static SolverState initial(const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& y0);
};

using VectorOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MatrixOracle = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

// Column-stacked iterates; the single-vector solver runs the n = 1 case of
// the same update so centralized and decentralized trajectories agree bit
// for bit.
struct ColumnState {
  Eigen::MatrixXd X, X_f;
  Eigen::MatrixXd Y, Y_f, Y_prev;
};

// Applied to the pre-consensus updates (U, W) in place between the primal/
// dual step and the momentum bookkeeping; null means no projection.
using ConsensusProjector =
    std::function<void(Eigen::MatrixXd& U, Eigen::MatrixXd& W)>;

// One primal-dual update: momentum extrapolation, convex interpolation,
// a gradient step on each block (the dual step sees the already updated
// primal point), optional consensus projection, then the f-iterate update.
// Exactly one call to each oracle per invocation. Throws on non-finite
// iterates.
ColumnState apdg_step_columns(const ColumnState& s, const ApdgParameters& p,
                              const MatrixOracle& grad_f,
                              const MatrixOracle& grad_g,
                              const Eigen::MatrixXd& A,
                              const ConsensusProjector& project = nullptr);

SolverState apdg_step(const SolverState& s, const ApdgParameters& p,
                      const VectorOracle& grad_f, const VectorOracle& grad_g,
                      const Eigen::MatrixXd& A);

struct LyapunovReport {
  double psi = 0.0;
  double dist_x_term = 0.0;
  double dist_y_term = 0.0;
  double bregman_f_term = 0.0;
  double bregman_g_term = 0.0;
  double momentum_term = 0.0;
  double cross_term = 0.0;
  double lower_bound_check = 0.0;  // (3/4eta_x)||x-x*||^2 + (1/eta_y)||y-y*||^2
};

LyapunovReport lyapunov(const SolverState& s, const ApdgParameters& p,
                        const GroundTruth& truth,
                        const SaddlePointProblem& problem);

struct OracleConfig {
  enum class Kind { exact, stochastic, biased };
  Kind kind = Kind::exact;
  long batch_f = 1;
  long batch_g = 1;
  std::uint64_t master_seed = 0;
  // Constant gradient offsets for Kind::biased (model-inexactness injection).
  Eigen::VectorXd bias_f, bias_g;
};

struct StopRule {
  long max_iters = 1000;
  double target_eps = 0.0;  // on max{||x-x*||^2, ||y-y*||^2}; 0 disables
};

struct IterationRecord {
  long k = 0;
  double dist_x2 = 0.0;
  double dist_y2 = 0.0;
  double psi = 0.0;
  long f_samples = 0;  // cumulative oracle samples over all nodes
  long g_samples = 0;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  SolverState final_state;
  bool reached_target = false;
  double projection_residual_x = 0.0;  // ||x0 - proj(x0)|| onto range(A')
  double projection_residual_y = 0.0;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs the solver against the averaged oracles of `problem`. The initial
// point defaults to zero; nonzero starts are projected onto range(A') and
// range(A). Aborts with DivergenceError when Psi exceeds 1e6 Psi^0.
RunTrace run(const SaddlePointProblem& problem, const ApdgParameters& params,
             const OracleConfig& oracle, const StopRule& stop,
             const GroundTruth& truth,
             const Eigen::VectorXd* x0 = nullptr,
             const Eigen::VectorXd* y0 = nullptr);

struct BatchSizes {
  long r_f = 1;
  long r_g = 1;
};

// Batch sizes sufficient for a target accuracy eps under variance bounds
// (sigma_f^2, sigma_g^2); ceil of the closed-form requirement, clamped to 1.
BatchSizes compute_batch_sizes(const SolverConstants& c, double omega,
                               double theta, double eps, double sigma_f2,
                               double sigma_g2);

// nu = max{omega/(3 L_xy), 1/(4 L_xy omega)}: translates the Lyapunov value
// into squared iterate distances.
double noise_balance(double omega, double L_xy);

// ceil((1/(1-theta)) ln(3 psi0 nu / eps)), clamped below at zero: iterations
// sufficient to push the contracting part of the error under eps/3.
long planned_iterations(double psi0, double nu, double theta, double eps);

// Orthogonal projection of v onto the column space of basis.
Eigen::VectorXd project_to_range(const Eigen::MatrixXd& basis,
                                 const Eigen::VectorXd& v);

}  // namespace saddle

#endif
