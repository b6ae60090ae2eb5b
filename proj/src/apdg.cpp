#include "saddle/apdg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace saddle {

namespace {

double max_of(std::initializer_list<double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  return m;
}

struct RegimeSetting {
  double omega, sigma_x, sigma_y;
  SolverConstants eff;
};

RegimeSetting regime_setting(const SolverConstants& c, Regime r) {
  RegimeSetting s;
  s.eff = c;
  switch (r) {
    case Regime::A:
      s.omega = std::sqrt(c.mu_y / c.mu_x);
      s.sigma_x = std::sqrt(c.mu_x / (2.0 * c.L_x));
      s.sigma_y = std::sqrt(c.mu_y / (2.0 * c.L_y));
      break;
    case Regime::B:
      s.eff.mu_y = 0.0;
      s.omega = std::sqrt(c.mu_xy * c.mu_xy / (2.0 * c.mu_x * c.L_x));
      s.sigma_x = std::sqrt(c.mu_x / (2.0 * c.L_x));
      s.sigma_y =
          std::min(1.0, std::sqrt(c.mu_xy * c.mu_xy / (4.0 * c.L_x * c.L_y)));
      break;
    case Regime::C:
      s.eff.mu_x = 0.0;
      s.omega = std::sqrt(2.0 * c.mu_y * c.L_y / (c.mu_yx * c.mu_yx));
      s.sigma_x =
          std::min(1.0, std::sqrt(c.mu_yx * c.mu_yx / (4.0 * c.L_x * c.L_y)));
      s.sigma_y = std::sqrt(c.mu_y / (2.0 * c.L_y));
      break;
    case Regime::D:
      s.eff.mu_x = 0.0;
      s.eff.mu_y = 0.0;
      s.omega = (c.mu_xy / c.mu_yx) * std::sqrt(c.L_y / c.L_x);
      s.sigma_x =
          std::min(1.0, std::sqrt(c.mu_yx * c.mu_yx / (4.0 * c.L_x * c.L_y)));
      s.sigma_y =
          std::min(1.0, std::sqrt(c.mu_xy * c.mu_xy / (4.0 * c.L_x * c.L_y)));
      break;
  }
  return s;
}

double rho_for(const SolverConstants& c, Regime r, double w, double sx,
               double sy) {
  double m = 0.0;
  switch (r) {
    case Regime::A:
      m = max_of({4.0 * (c.mu_x + c.L_x * sx) / c.mu_x, 2.0 / sx,
                  4.0 * (c.mu_y + c.L_y * sy) / c.mu_y, 2.0 / sy,
                  4.0 * c.L_xy / (c.mu_x * w), 4.0 * c.L_xy * w / c.mu_y});
      break;
    case Regime::B:
      m = max_of({4.0 * (c.mu_x + c.L_x * sx) / c.mu_x, 2.0 / sx,
                  8.0 * c.L_x * (c.mu_y + c.L_y * sy) / (c.mu_xy * c.mu_xy),
                  2.0 / sy, 2.0 * c.L_xy * c.L_xy / (c.mu_xy * c.mu_xy),
                  8.0 * c.L_x * c.L_xy * w / (c.mu_xy * c.mu_xy),
                  4.0 * c.L_xy / (c.mu_x * w)});
      break;
    case Regime::C:
      m = max_of({4.0 * (c.mu_y + c.L_y * sy) / c.mu_y, 2.0 / sy,
                  8.0 * c.L_y * (c.mu_x + c.L_x * sx) / (c.mu_yx * c.mu_yx),
                  2.0 / sx, 2.0 * c.L_xy * c.L_xy / (c.mu_yx * c.mu_yx),
                  8.0 * c.L_y * c.L_xy / (c.mu_yx * c.mu_yx * w),
                  4.0 * c.L_xy * w / c.mu_y});
      break;
    case Regime::D:
      m = max_of({8.0 * c.L_y * (c.mu_x + c.L_x * sx) / (c.mu_yx * c.mu_yx),
                  2.0 / sx,
                  8.0 * c.L_x * (c.mu_y + c.L_y * sy) / (c.mu_xy * c.mu_xy),
                  2.0 / sy, 8.0 * c.L_y * c.L_xy / (c.mu_yx * c.mu_yx * w),
                  8.0 * c.L_x * c.L_xy * w / (c.mu_xy * c.mu_xy),
                  2.0 * c.L_xy * c.L_xy / (c.mu_yx * c.mu_yx),
                  2.0 * c.L_xy * c.L_xy / (c.mu_xy * c.mu_xy)});
      break;
  }
  return 1.0 / m;
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::A: return "A";
    case Regime::B: return "B";
    case Regime::C: return "C";
    case Regime::D: return "D";
  }
  return "?";
}

SolverConstants solver_constants(const ProblemConstants& pc,
                                 const SpectralConstants& sc) {
  SolverConstants c;
  c.mu_x = pc.mu_x;
  c.L_x = pc.L_x;
  c.mu_y = pc.mu_y;
  c.L_y = pc.L_y;
  c.L_xy = sc.L_xy;
  c.mu_xy = sc.mu_xy;
  c.mu_yx = sc.mu_yx;
  return c;
}

SolverConstants hatted_constants(const SolverConstants& c) {
  SolverConstants h = c;
  h.mu_x = c.mu_x / 2.0;
  h.mu_y = c.mu_y / 2.0;
  h.L_x = 2.0 * c.L_x;
  h.L_y = 2.0 * c.L_y;
  return h;
}

bool regime_feasible(const SolverConstants& c, Regime r) {
  if (c.L_x <= 0.0 || c.L_y <= 0.0 || c.L_xy <= 0.0) return false;
  switch (r) {
    case Regime::A: return c.mu_x > 0.0 && c.mu_y > 0.0;
    case Regime::B: return c.mu_x > 0.0 && c.mu_xy > 0.0;
    case Regime::C: return c.mu_y > 0.0 && c.mu_yx > 0.0;
    case Regime::D: return c.mu_xy > 0.0 && c.mu_yx > 0.0;
  }
  return false;
}

ApdgParameters select_parameters(const SolverConstants& c, Regime r) {
  if (!regime_feasible(c, r))
    throw std::invalid_argument(std::string("regime ") + regime_name(r) +
                                " infeasible for the given constants");
  const RegimeSetting s = regime_setting(c, r);
  const SolverConstants& e = s.eff;

  ApdgParameters p;
  p.regime = r;
  p.effective = e;
  p.omega = s.omega;
  p.sigma_x = s.sigma_x;
  p.sigma_y = s.sigma_y;
  p.tau_x = 1.0 / (1.0 / p.sigma_x + 0.5);
  p.tau_y = 1.0 / (1.0 / p.sigma_y + 0.5);
  p.alpha_x = e.mu_x;
  p.alpha_y = e.mu_y;
  p.eta_x = std::min(1.0 / (4.0 * (e.mu_x + e.L_x * p.sigma_x)),
                     p.omega / (4.0 * e.L_xy));
  p.eta_y = std::min(1.0 / (4.0 * (e.mu_y + e.L_y * p.sigma_y)),
                     1.0 / (4.0 * e.L_xy * p.omega));
  p.beta_x = std::min(1.0 / (2.0 * e.L_y),
                      1.0 / (2.0 * p.eta_x * e.L_xy * e.L_xy));
  p.beta_y = std::min(1.0 / (2.0 * e.L_x),
                      1.0 / (2.0 * p.eta_y * e.L_xy * e.L_xy));
  p.rho = rho_for(e, r, p.omega, p.sigma_x, p.sigma_y);
  p.theta = 1.0 - p.rho;
  return p;
}

ApdgParameters select_parameters_auto(const SolverConstants& c) {
  std::optional<ApdgParameters> best;
  for (Regime r : {Regime::A, Regime::B, Regime::C, Regime::D}) {
    if (!regime_feasible(c, r)) continue;
    ApdgParameters p = select_parameters(c, r);
    if (!best || p.rho > best->rho) best = p;
  }
  if (!best)
    throw std::invalid_argument(
        "no feasible regime: all required curvature constants are zero");
  return *best;
}

SolverState SolverState::initial(const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& y0) {
  SolverState s;
  s.x = x0;
  s.x_f = x0;
  s.y = y0;
  s.y_f = y0;
  s.y_prev = y0;
  s.k = 0;
  return s;
}

ColumnState apdg_step_columns(const ColumnState& s, const ApdgParameters& p,
                              const MatrixOracle& grad_f,
                              const MatrixOracle& grad_g,
                              const Eigen::MatrixXd& A,
                              const ConsensusProjector& project) {
  if (s.X.rows() != A.cols() || s.Y.rows() != A.rows())
    throw std::invalid_argument("apdg step: state does not match coupling matrix");

  const Eigen::MatrixXd Y_m = s.Y + p.theta * (s.Y - s.Y_prev);
  const Eigen::MatrixXd X_g = p.tau_x * s.X + (1.0 - p.tau_x) * s.X_f;
  const Eigen::MatrixXd Y_g = p.tau_y * s.Y + (1.0 - p.tau_y) * s.Y_f;

  // One batched oracle call per block, reused by both updates.
  const Eigen::MatrixXd Gf = grad_f(X_g);
  const Eigen::MatrixXd Gg = grad_g(Y_g);

  Eigen::MatrixXd U = s.X + p.eta_x * p.alpha_x * (X_g - s.X) -
                      p.eta_x * p.beta_x * (A.transpose() * (A * s.X - Gg)) -
                      p.eta_x * (Gf + A.transpose() * Y_m);
  Eigen::MatrixXd W = s.Y + p.eta_y * p.alpha_y * (Y_g - s.Y) -
                      p.eta_y * p.beta_y * (A * (A.transpose() * s.Y + Gf)) -
                      p.eta_y * (Gg - A * U);

  if (project) project(U, W);

  ColumnState out;
  out.X_f = X_g + p.sigma_x * (U - s.X);
  out.Y_f = Y_g + p.sigma_y * (W - s.Y);
  out.Y_prev = s.Y;
  out.X = std::move(U);
  out.Y = std::move(W);

  if (!out.X.allFinite() || !out.Y.allFinite() || !out.X_f.allFinite() ||
      !out.Y_f.allFinite())
    throw DivergenceError("apdg step: non-finite iterate (divergent parameters)");
  return out;
}

SolverState apdg_step(const SolverState& s, const ApdgParameters& p,
                      const VectorOracle& grad_f, const VectorOracle& grad_g,
                      const Eigen::MatrixXd& A) {
  ColumnState cs;
  cs.X = s.x;
  cs.X_f = s.x_f;
  cs.Y = s.y;
  cs.Y_f = s.y_f;
  cs.Y_prev = s.y_prev;
  auto wrap_f = [&grad_f](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
    return grad_f(X.col(0));
  };
  auto wrap_g = [&grad_g](const Eigen::MatrixXd& Y) -> Eigen::MatrixXd {
    return grad_g(Y.col(0));
  };
  const ColumnState ns = apdg_step_columns(cs, p, wrap_f, wrap_g, A);
  SolverState out;
  out.x = ns.X.col(0);
  out.x_f = ns.X_f.col(0);
  out.y = ns.Y.col(0);
  out.y_f = ns.Y_f.col(0);
  out.y_prev = ns.Y_prev.col(0);
  out.k = s.k + 1;
  return out;
}

LyapunovReport lyapunov(const SolverState& s, const ApdgParameters& p,
                        const GroundTruth& truth,
                        const SaddlePointProblem& problem) {
  const QuadraticFunction fbar = problem.averaged_f();
  const QuadraticFunction gbar = problem.averaged_g();
  const Eigen::VectorXd dx = s.x - truth.x_star;
  const Eigen::VectorXd dy = s.y - truth.y_star;
  const Eigen::VectorXd dm = s.y - s.y_prev;

  LyapunovReport r;
  r.dist_x_term = dx.squaredNorm() / p.eta_x;
  r.dist_y_term = dy.squaredNorm() / p.eta_y;
  r.bregman_f_term = 2.0 / p.sigma_x * fbar.bregman(s.x_f, truth.x_star);
  r.bregman_g_term = 2.0 / p.sigma_y * gbar.bregman(s.y_f, truth.y_star);
  r.momentum_term = dm.squaredNorm() / (4.0 * p.eta_y);
  r.cross_term = -2.0 * dm.dot(problem.coupling * dx);
  r.psi = r.dist_x_term + r.dist_y_term + r.bregman_f_term + r.bregman_g_term +
          r.momentum_term + r.cross_term;
  r.lower_bound_check =
      0.75 * dx.squaredNorm() / p.eta_x + dy.squaredNorm() / p.eta_y;
  return r;
}

Eigen::VectorXd project_to_range(const Eigen::MatrixXd& basis,
                                 const Eigen::VectorXd& v) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(basis, Eigen::ComputeThinU);
  const double tol =
      1e-12 * (svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++rank;
  if (rank == 0) return Eigen::VectorXd::Zero(v.size());
  const Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
  return U * (U.transpose() * v);
}

RunTrace run(const SaddlePointProblem& problem, const ApdgParameters& params,
             const OracleConfig& oracle, const StopRule& stop,
             const GroundTruth& truth, const Eigen::VectorXd* x0,
             const Eigen::VectorXd* y0) {
  const int n = problem.nodes();
  const int dx = problem.dim_x();
  const int dy = problem.dim_y();

  RunTrace trace;
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(dx);
  Eigen::VectorXd yi = Eigen::VectorXd::Zero(dy);
  if (x0 && x0->size() > 0) {
    xi = project_to_range(problem.coupling.transpose(), *x0);
    trace.projection_residual_x = (*x0 - xi).norm();
  }
  if (y0 && y0->size() > 0) {
    yi = project_to_range(problem.coupling, *y0);
    trace.projection_residual_y = (*y0 - yi).norm();
  }

  SolverState s = SolverState::initial(xi, yi);
  const double psi0 = lyapunov(s, params, truth, problem).psi;
  const double guard = 1e6 * (psi0 > 0.0 ? psi0 : 1.0);

  long f_samples = 0, g_samples = 0;
  const bool stochastic = oracle.kind == OracleConfig::Kind::stochastic;
  const long rf = stochastic ? oracle.batch_f : 1;
  const long rg = stochastic ? oracle.batch_g : 1;

  for (long k = 0;; ++k) {
    const double dist_x2 = (s.x - truth.x_star).squaredNorm();
    const double dist_y2 = (s.y - truth.y_star).squaredNorm();
    const double psi = lyapunov(s, params, truth, problem).psi;
    trace.records.push_back({k, dist_x2, dist_y2, psi, f_samples, g_samples});

    if (stop.target_eps > 0.0 &&
        std::max(dist_x2, dist_y2) <= stop.target_eps) {
      trace.reached_target = true;
      break;
    }
    if (k >= stop.max_iters) break;
    if (psi > guard)
      throw DivergenceError("run: Lyapunov value exceeded 1e6 x initial");

    VectorOracle of, og;
    switch (oracle.kind) {
      case OracleConfig::Kind::exact:
        of = [&](const Eigen::VectorXd& x) {
          Eigen::VectorXd acc = exact_gradient_f(problem, 0, x);
          for (int i = 1; i < n; ++i) acc += exact_gradient_f(problem, i, x);
          return Eigen::VectorXd(acc / static_cast<double>(n));
        };
        og = [&](const Eigen::VectorXd& y) {
          Eigen::VectorXd acc = exact_gradient_g(problem, 0, y);
          for (int i = 1; i < n; ++i) acc += exact_gradient_g(problem, i, y);
          return Eigen::VectorXd(acc / static_cast<double>(n));
        };
        break;
      case OracleConfig::Kind::stochastic:
        of = [&, k](const Eigen::VectorXd& x) {
          Eigen::VectorXd acc = Eigen::VectorXd::Zero(dx);
          for (int i = 0; i < n; ++i) {
            NoiseStream stream(oracle.master_seed, i, StreamVar::f_gradient,
                               static_cast<std::uint64_t>(k));
            acc += stochastic_gradient_f(problem, i, x, stream, rf);
          }
          return Eigen::VectorXd(acc / static_cast<double>(n));
        };
        og = [&, k](const Eigen::VectorXd& y) {
          Eigen::VectorXd acc = Eigen::VectorXd::Zero(dy);
          for (int i = 0; i < n; ++i) {
            NoiseStream stream(oracle.master_seed, i, StreamVar::g_gradient,
                               static_cast<std::uint64_t>(k));
            acc += stochastic_gradient_g(problem, i, y, stream, rg);
          }
          return Eigen::VectorXd(acc / static_cast<double>(n));
        };
        break;
      case OracleConfig::Kind::biased:
        of = [&](const Eigen::VectorXd& x) {
          Eigen::VectorXd acc = exact_gradient_f(problem, 0, x);
          for (int i = 1; i < n; ++i) acc += exact_gradient_f(problem, i, x);
          acc /= static_cast<double>(n);
          if (oracle.bias_f.size() > 0) acc += oracle.bias_f;
          return acc;
        };
        og = [&](const Eigen::VectorXd& y) {
          Eigen::VectorXd acc = exact_gradient_g(problem, 0, y);
          for (int i = 1; i < n; ++i) acc += exact_gradient_g(problem, i, y);
          acc /= static_cast<double>(n);
          if (oracle.bias_g.size() > 0) acc += oracle.bias_g;
          return acc;
        };
        break;
    }

    s = apdg_step(s, params, of, og, problem.coupling);
    f_samples += rf * n;
    g_samples += rg * n;
  }

  trace.final_state = s;
  return trace;
}

double noise_balance(double omega, double L_xy) {
  return std::max(omega / (3.0 * L_xy), 1.0 / (4.0 * L_xy * omega));
}

long planned_iterations(double psi0, double nu, double theta, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("planned iterations: eps must be positive");
  const double ratio = 3.0 * psi0 * nu / eps;
  if (!(ratio > 1.0)) return 0;
  return static_cast<long>(std::ceil(std::log(ratio) / (1.0 - theta)));
}

BatchSizes compute_batch_sizes(const SolverConstants& c, double omega,
                               double theta, double eps, double sigma_f2,
                               double sigma_g2) {
  if (eps <= 0.0) throw std::invalid_argument("batch sizes: eps must be positive");
  if (theta <= 0.0 || theta >= 1.0)
    throw std::invalid_argument("batch sizes: theta must lie in (0, 1)");
  const double lead =
      std::max(omega, 1.0 / omega) / (2.0 * c.L_xy * (1.0 - theta) * eps);
  BatchSizes b;
  b.r_f = std::max<long>(
      1, static_cast<long>(
             std::ceil(lead * (1.0 / c.L_x + omega / c.L_xy) * sigma_f2)));
  b.r_g = std::max<long>(
      1, static_cast<long>(std::ceil(
             lead * (1.0 / c.L_y + 1.0 / (c.L_xy * omega)) * sigma_g2)));
  return b;
}

}  // namespace saddle
