#ifndef SADDLE_DECENTRALIZED_HPP
#define SADDLE_DECENTRALIZED_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "saddle/apdg.hpp"
#include "saddle/network.hpp"
#include "saddle/problem.hpp"

namespace saddle {

struct DecentralizedState {
  Eigen::MatrixXd X, X_f;        // dim_x x n
  Eigen::MatrixXd Y, Y_f, Y_prev;  // dim_y x n
  long k = 0;
  double consensus_error_x = 0.0;  // ||X - Xbar||_F after the last projection
  double consensus_error_y = 0.0;
  double spread_u = 0.0;  // pre-consensus ||U - Ubar||_F of the last step
  double spread_w = 0.0;

  // Requires equal columns (consensus start); X_f = X, Y_f = Y_prev = Y.
  static DecentralizedState initial(const Eigen::MatrixXd& X0,
                                    const Eigen::MatrixXd& Y0);
};

// Everything the consensus-subroutine analysis fixes before the run: the
// admissible consensus error delta', the model inexactness (delta_x,
// delta_y) it induces, the pre-consensus spread bound D, the per-iteration
// round count T, per-node batch sizes, and the planned iteration count N.
struct InexactnessBudget {
  double eps = 0.0;
  double psi0 = 0.0;
  double nu = 0.0;
  double E = 0.0;
  double delta_prime = 0.0;
  double delta_x = 0.0, delta_y = 0.0;
  double F_x = 0.0, F_y = 0.0;
  double sigma_Fr2 = 0.0, sigma_Gr2 = 0.0;
  double Sigma2 = 0.0;
  double M_x = 0.0, M_y = 0.0;
  double D_x1 = 0.0, D_x2 = 0.0, D_y1 = 0.0, D_y2 = 0.0;
  double D = 0.0;
  long T = 0;
  long N = 0;
  std::vector<long> r_f, r_g;  // per-node batch sizes
  // Constants the parameters were selected with, exposed for audit.
  double L_x_hat = 0.0, L_y_hat = 0.0, mu_x_hat = 0.0, mu_y_hat = 0.0;
  double grad_norm_f_star = 0.0;  // ||grad F(X*)||_F, exact on quadratics
  double grad_norm_g_star = 0.0;
};

// params must come from select_parameters on hatted_constants(...); psi0 is
// the Lyapunov value of the averaged initial state under those parameters.
InexactnessBudget plan_budget(const SaddlePointProblem& problem,
                              const SpectralConstants& spectral,
                              const ApdgParameters& params,
                              const ContractionCertificate& cert, double eps,
                              double psi0, const GroundTruth& truth);

// One iteration: momentum/interpolation lines, per-node batched gradients
// with the budget's batch sizes, the column-wise primal/dual update, T
// consensus rounds applied to both blocks over the same mixing window
// starting at consensus_cursor, then the f-iterate update. Throws when the
// post-projection consensus error exceeds 10 sqrt(delta').
DecentralizedState decentralized_step(const DecentralizedState& s,
                                      const ApdgParameters& params,
                                      const InexactnessBudget& budget,
                                      const SaddlePointProblem& problem,
                                      const MixingSchedule& schedule,
                                      long consensus_cursor,
                                      std::uint64_t master_seed);

// Column means as a centralized state; the object the convergence theory
// tracks.
SolverState average_view(const DecentralizedState& s);

struct DecentralizedIterationRecord {
  long k = 0;
  double dist_x2 = 0.0;  // averaged iterate distances to ground truth
  double dist_y2 = 0.0;
  double cons_err_x = 0.0;  // after projection
  double cons_err_y = 0.0;
  double spread_u = 0.0;  // before projection
  double spread_w = 0.0;
  long communications = 0;  // cumulative rounds
};

struct DecentralizedTrace {
  std::vector<DecentralizedIterationRecord> records;
  InexactnessBudget budget;
  ApdgParameters params;
  GroundTruth truth;
  long communications = 0;             // N * T
  std::vector<long> oracle_samples_f;  // per node, N * r_{f,i}
  std::vector<long> oracle_samples_g;
  double final_max_dist = 0.0;  // max of the two averaged squared distances
  DecentralizedState final_state;
};

// Plans the budget from the certified schedule and runs the planned N
// iterations from the zero initial state.
DecentralizedTrace run_decentralized(const SaddlePointProblem& problem,
                                     const MixingSchedule& schedule,
                                     const ContractionCertificate& cert,
                                     double eps, std::optional<Regime> regime,
                                     std::uint64_t seed);

}  // namespace saddle

#endif
