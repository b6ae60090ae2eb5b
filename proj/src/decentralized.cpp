#include "saddle/decentralized.hpp"

#include <cmath>
#include <stdexcept>

namespace saddle {

namespace {

double spread_from_mean(const Eigen::MatrixXd& Z) {
  const Eigen::MatrixXd Zbar = Z.rowwise().mean().replicate(1, Z.cols());
  return (Z - Zbar).norm();
}

}  // namespace

DecentralizedState DecentralizedState::initial(const Eigen::MatrixXd& X0,
                                               const Eigen::MatrixXd& Y0) {
  DecentralizedState s;
  s.X = X0;
  s.X_f = X0;
  s.Y = Y0;
  s.Y_f = Y0;
  s.Y_prev = Y0;
  s.k = 0;
  s.consensus_error_x = spread_from_mean(X0);
  s.consensus_error_y = spread_from_mean(Y0);
  const double tol = 1e-12 * (1.0 + X0.norm() + Y0.norm());
  if (s.consensus_error_x > tol || s.consensus_error_y > tol)
    throw std::invalid_argument(
        "decentralized state: initial columns must agree (consensus start)");
  return s;
}

InexactnessBudget plan_budget(const SaddlePointProblem& problem,
                              const SpectralConstants& spectral,
                              const ApdgParameters& params,
                              const ContractionCertificate& cert, double eps,
                              double psi0, const GroundTruth& truth) {
  if (eps <= 0.0) throw std::invalid_argument("budget: eps must be positive");
  if (cert.lambda <= 0.0 || cert.lambda > 1.0 || cert.tau < 1)
    throw std::invalid_argument("budget: contraction certificate missing or invalid");

  const ProblemConstants c = problem.constants();
  const int n = problem.nodes();
  const double L_xy = spectral.L_xy;
  const double omega = params.omega;
  const double gap = 1.0 - params.theta;

  InexactnessBudget b;
  b.eps = eps;
  b.psi0 = psi0;
  b.L_x_hat = 2.0 * c.L_x;
  b.L_y_hat = 2.0 * c.L_y;
  b.mu_x_hat = c.mu_x / 2.0;
  b.mu_y_hat = c.mu_y / 2.0;

  b.nu = noise_balance(omega, L_xy);

  const double Ex = (c.L_lx * c.L_lx / c.L_x + 2.0 * c.L_lx * c.L_lx / c.mu_x +
                     c.L_lx - c.mu_lx) /
                    (2.0 * n);
  const double Ey = (c.L_ly * c.L_ly / c.L_y + 2.0 * c.L_ly * c.L_ly / c.mu_y +
                     c.L_ly - c.mu_ly) /
                    (2.0 * n);
  b.E = std::max(Ex, Ey);

  b.delta_prime = gap * gap * eps / (24.0 * b.E * b.nu);
  if (!(b.delta_prime > 0.0))
    throw std::runtime_error("budget: degenerate constants give non-positive delta'");
  b.delta_x = Ex * b.delta_prime;
  b.delta_y = Ey * b.delta_prime;

  b.F_x = b.nu / (2.0 * n * gap) * (1.0 / b.L_x_hat + omega / L_xy);
  b.F_y = b.nu / (2.0 * n * gap) * (1.0 / b.L_y_hat + 1.0 / (L_xy * omega));

  b.r_f.resize(n);
  b.r_g.resize(n);
  double srf = 0.0, srg = 0.0;
  for (int i = 0; i < n; ++i) {
    b.r_f[i] = std::max<long>(
        1, static_cast<long>(
               std::ceil(6.0 * b.F_x * problem.noise.sigma_f2[i] / eps)));
    b.r_g[i] = std::max<long>(
        1, static_cast<long>(
               std::ceil(6.0 * b.F_y * problem.noise.sigma_g2[i] / eps)));
    srf += problem.noise.sigma_f2[i] / static_cast<double>(b.r_f[i]);
    srg += problem.noise.sigma_g2[i] / static_cast<double>(b.r_g[i]);
  }
  b.sigma_Fr2 = srf / n;
  b.sigma_Gr2 = srg / n;

  b.Sigma2 = (1.0 / (2.0 * c.L_x) + omega / L_xy) * b.sigma_Fr2 / n +
             (1.0 / (2.0 * c.L_y) + 1.0 / (L_xy * omega)) * b.sigma_Gr2 / n;

  const double tail =
      psi0 + 4.0 * (b.delta_x + b.delta_y) / (gap * gap) + b.Sigma2 / (2.0 * gap);
  b.M_x = std::sqrt(omega / (3.0 * L_xy) * tail);
  b.M_y = std::sqrt(1.0 / (4.0 * L_xy * omega) * tail);

  double nf2 = 0.0, ng2 = 0.0;
  for (int i = 0; i < n; ++i) {
    nf2 += problem.f[i].gradient(truth.x_star).squaredNorm();
    ng2 += problem.g[i].gradient(truth.y_star).squaredNorm();
  }
  b.grad_norm_f_star = std::sqrt(nf2);
  b.grad_norm_g_star = std::sqrt(ng2);

  const double root_n = std::sqrt(static_cast<double>(n));
  const double f_part =
      root_n * std::sqrt(b.sigma_Fr2) + c.L_x * root_n * b.M_x + b.grad_norm_f_star;
  const double g_part =
      root_n * std::sqrt(b.sigma_Gr2) + c.L_y * root_n * b.M_y + b.grad_norm_g_star;

  b.D_x1 = 1.5 + L_xy / (2.0 * c.mu_x) * (1.0 + 2.0 * params.theta) +
           c.L_ly / (2.0 * L_xy) + c.L_lx / (2.0 * c.mu_x);
  b.D_x2 = g_part / (2.0 * L_xy) + f_part / (2.0 * c.mu_x);
  b.D_y1 = 1.5 + L_xy / (2.0 * c.mu_y) * b.D_x1 + c.L_lx / (2.0 * L_xy) +
           c.L_ly / (2.0 * c.mu_y);
  b.D_y2 = L_xy / (2.0 * c.mu_y) * b.D_x2 + f_part / (2.0 * L_xy) +
           g_part / (2.0 * c.mu_y);

  const double root_dp = std::sqrt(b.delta_prime);
  b.D = std::max(b.D_x1 * root_dp + b.D_x2, b.D_y1 * root_dp + b.D_y2);

  b.T = consensus_rounds_needed(b.D, b.delta_prime, cert.tau, cert.lambda);
  b.N = planned_iterations(psi0, b.nu, params.theta, eps);
  return b;
}

DecentralizedState decentralized_step(const DecentralizedState& s,
                                      const ApdgParameters& params,
                                      const InexactnessBudget& budget,
                                      const SaddlePointProblem& problem,
                                      const MixingSchedule& schedule,
                                      long consensus_cursor,
                                      std::uint64_t master_seed) {
  const int n = problem.nodes();
  if (s.X.cols() != n || s.Y.cols() != n)
    throw std::invalid_argument("decentralized step: column count must equal node count");
  const std::uint64_t iter = static_cast<std::uint64_t>(s.k);

  MatrixOracle grad_f = [&](const Eigen::MatrixXd& Xg) {
    Eigen::MatrixXd G(Xg.rows(), n);
    for (int i = 0; i < n; ++i) {
      NoiseStream stream(master_seed, i, StreamVar::f_gradient, iter);
      G.col(i) =
          stochastic_gradient_f(problem, i, Xg.col(i), stream, budget.r_f[i]);
    }
    return G;
  };
  MatrixOracle grad_g = [&](const Eigen::MatrixXd& Yg) {
    Eigen::MatrixXd G(Yg.rows(), n);
    for (int i = 0; i < n; ++i) {
      NoiseStream stream(master_seed, i, StreamVar::g_gradient, iter);
      G.col(i) =
          stochastic_gradient_g(problem, i, Yg.col(i), stream, budget.r_g[i]);
    }
    return G;
  };

  double spread_u = 0.0, spread_w = 0.0;
  ConsensusProjector project = [&](Eigen::MatrixXd& U, Eigen::MatrixXd& W) {
    spread_u = spread_from_mean(U);
    spread_w = spread_from_mean(W);
    // Both blocks travel over the same mixing window.
    U = consensus(U, schedule, consensus_cursor, budget.T);
    W = consensus(W, schedule, consensus_cursor, budget.T);
  };

  ColumnState cs{s.X, s.X_f, s.Y, s.Y_f, s.Y_prev};
  const ColumnState ns = apdg_step_columns(cs, params, grad_f, grad_g,
                                           problem.coupling, project);

  DecentralizedState out;
  out.X = ns.X;
  out.X_f = ns.X_f;
  out.Y = ns.Y;
  out.Y_f = ns.Y_f;
  out.Y_prev = ns.Y_prev;
  out.k = s.k + 1;
  out.spread_u = spread_u;
  out.spread_w = spread_w;
  out.consensus_error_x = spread_from_mean(out.X);
  out.consensus_error_y = spread_from_mean(out.Y);

  const double limit = 10.0 * std::sqrt(budget.delta_prime);
  if (std::max(out.consensus_error_x, out.consensus_error_y) > limit)
    throw std::runtime_error(
        "decentralized step: consensus error after projection exceeds 10 "
        "sqrt(delta') (budget violated)");
  return out;
}

SolverState average_view(const DecentralizedState& s) {
  SolverState v;
  v.x = s.X.rowwise().mean();
  v.x_f = s.X_f.rowwise().mean();
  v.y = s.Y.rowwise().mean();
  v.y_f = s.Y_f.rowwise().mean();
  v.y_prev = s.Y_prev.rowwise().mean();
  v.k = s.k;
  return v;
}

DecentralizedTrace run_decentralized(const SaddlePointProblem& problem,
                                     const MixingSchedule& schedule,
                                     const ContractionCertificate& cert,
                                     double eps, std::optional<Regime> regime,
                                     std::uint64_t seed) {
  if (schedule.nodes() != problem.nodes())
    throw std::invalid_argument("decentralized run: schedule/problem node mismatch");

  DecentralizedTrace trace;
  trace.truth = solve_ground_truth(problem);
  const SpectralConstants sc = compute_spectral_constants(
      problem.coupling, problem.range_g_in_A, problem.range_f_in_At);
  const SolverConstants hatted =
      hatted_constants(solver_constants(problem.constants(), sc));
  trace.params = regime ? select_parameters(hatted, *regime)
                        : select_parameters_auto(hatted);

  const int n = problem.nodes();
  DecentralizedState state = DecentralizedState::initial(
      Eigen::MatrixXd::Zero(problem.dim_x(), n),
      Eigen::MatrixXd::Zero(problem.dim_y(), n));

  const double psi0 =
      lyapunov(average_view(state), trace.params, trace.truth, problem).psi;
  trace.budget =
      plan_budget(problem, sc, trace.params, cert, eps, psi0, trace.truth);

  trace.oracle_samples_f.assign(n, 0);
  trace.oracle_samples_g.assign(n, 0);

  const double guard = 1e6 * (psi0 > 0.0 ? psi0 : 1.0);
  for (long k = 0; k < trace.budget.N; ++k) {
    state = decentralized_step(state, trace.params, trace.budget, problem,
                               schedule, k * trace.budget.T, seed);
    trace.communications += trace.budget.T;
    for (int i = 0; i < n; ++i) {
      trace.oracle_samples_f[i] += trace.budget.r_f[i];
      trace.oracle_samples_g[i] += trace.budget.r_g[i];
    }

    const SolverState avg = average_view(state);
    const double dist_x2 = (avg.x - trace.truth.x_star).squaredNorm();
    const double dist_y2 = (avg.y - trace.truth.y_star).squaredNorm();
    trace.records.push_back({state.k, dist_x2, dist_y2,
                             state.consensus_error_x, state.consensus_error_y,
                             state.spread_u, state.spread_w,
                             trace.communications});

    const double psi = lyapunov(avg, trace.params, trace.truth, problem).psi;
    if (psi > guard)
      throw DivergenceError("decentralized run: Lyapunov value exceeded 1e6 x initial");
  }

  if (!trace.records.empty()) {
    const auto& last = trace.records.back();
    trace.final_max_dist = std::max(last.dist_x2, last.dist_y2);
  } else {
    const SolverState avg = average_view(state);
    trace.final_max_dist =
        std::max((avg.x - trace.truth.x_star).squaredNorm(),
                 (avg.y - trace.truth.y_star).squaredNorm());
  }
  trace.final_state = state;
  return trace;
}

}  // namespace saddle
