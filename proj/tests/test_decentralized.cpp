#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "saddle/decentralized.hpp"
#include "saddle/harness.hpp"

using namespace saddle;

namespace {

SaddlePointProblem make_problem(int n, int d, double mu, double L, double L_xy,
                                double sigma2, double het, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.n = n;
  spec.dim_x = spec.dim_y = d;
  spec.mu_x = spec.mu_y = mu;
  spec.L_x = spec.L_y = L;
  spec.L_xy = L_xy;
  spec.sigma_f2 = spec.sigma_g2 = sigma2;
  spec.heterogeneity = het;
  spec.seed = seed;
  return generate_problem(spec);
}

struct Setup {
  SaddlePointProblem problem;
  GroundTruth truth;
  SpectralConstants sc;
  ApdgParameters params;       // selected on hatted constants
  ContractionCertificate cert;
  MixingSchedule schedule;
  InexactnessBudget budget;
};

Setup make_setup(int n, int d, double mu, double L, double L_xy, double sigma2,
                 double het, double eps, std::uint64_t seed) {
  Setup s{make_problem(n, d, mu, L, L_xy, sigma2, het, seed),
          {},
          {},
          {},
          {},
          MixingSchedule::static_graph(ring_graph(n)),
          {}};
  s.truth = solve_ground_truth(s.problem);
  s.sc = compute_spectral_constants(s.problem.coupling, false, false);
  s.params = select_parameters(
      hatted_constants(solver_constants(s.problem.constants(), s.sc)),
      Regime::A);
  s.cert = certify_contraction(s.schedule, 1, 1);
  const int dx = s.problem.dim_x(), dy = s.problem.dim_y();
  const double psi0 =
      lyapunov(SolverState::initial(Eigen::VectorXd::Zero(dx),
                                    Eigen::VectorXd::Zero(dy)),
               s.params, s.truth, s.problem)
          .psi;
  s.budget = plan_budget(s.problem, s.sc, s.params, s.cert, eps, psi0, s.truth);
  return s;
}

}  // namespace

TEST_CASE("plan_budget: noiseless collapse") {
  Setup s = make_setup(3, 4, 1.0, 2.0, 1.5, 0.0, 0.0, 1e-3, 41);
  const InexactnessBudget& b = s.budget;
  for (long r : b.r_f) CHECK(r == 1);
  for (long r : b.r_g) CHECK(r == 1);
  CHECK(b.sigma_Fr2 == 0.0);
  CHECK(b.Sigma2 == 0.0);
  const double gap = 1.0 - s.params.theta;
  const double expected_mx2 =
      s.params.omega / (3.0 * s.sc.L_xy) *
      (b.psi0 + 4.0 * (b.delta_x + b.delta_y) / (gap * gap));
  CHECK(b.M_x * b.M_x == doctest::Approx(expected_mx2).epsilon(1e-12));
  CHECK(b.N > 0);
  CHECK(b.T > 0);
}

TEST_CASE("plan_budget: delta formulas at unit constants") {
  // two identical unit-curvature nodes: E_x = E_y = 3/4, so
  // delta_x = delta_y = (3/4) delta'
  Setup s = make_setup(2, 3, 1.0, 1.0, 1.0, 0.0, 0.0, 1e-2, 5);
  CHECK(s.budget.delta_x == doctest::Approx(0.75 * s.budget.delta_prime).epsilon(1e-12));
  CHECK(s.budget.delta_y == doctest::Approx(0.75 * s.budget.delta_prime).epsilon(1e-12));
  // delta' = (1-theta)^2 eps / (24 E nu)
  const double gap = 1.0 - s.params.theta;
  CHECK(s.budget.delta_prime ==
        doctest::Approx(gap * gap * 1e-2 / (24.0 * 0.75 * s.budget.nu))
            .epsilon(1e-12));
}

TEST_CASE("plan_budget: delta' is linear in eps; rounds shift by (tau/lambda) ln 2") {
  Setup s1 = make_setup(3, 3, 0.5, 2.0, 1.0, 0.2, 0.2, 1e-3, 9);
  Setup s2 = make_setup(3, 3, 0.5, 2.0, 1.0, 0.2, 0.2, 2e-3, 9);
  CHECK(s2.budget.delta_prime ==
        doctest::Approx(2.0 * s1.budget.delta_prime).epsilon(1e-12));

  // with D held fixed, doubling delta' reduces T by (tau/lambda) ln 2
  const double D = 100.0;
  const long t1 = consensus_rounds_needed(D, s1.budget.delta_prime, 1, 0.5);
  const long t2 = consensus_rounds_needed(D, 2.0 * s1.budget.delta_prime, 1, 0.5);
  const double shift = std::log(2.0) / 0.5;
  CHECK(std::abs(static_cast<double>(t1 - t2) - shift) <= 1.0 + 1e-9);
}

TEST_CASE("plan_budget: rejects a missing certificate") {
  Setup s = make_setup(2, 2, 1.0, 2.0, 1.0, 0.0, 0.0, 1e-3, 2);
  ContractionCertificate bad;
  bad.tau = 1;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(plan_budget(s.problem, s.sc, s.params, bad, 1e-3,
                              s.budget.psi0, s.truth),
                  std::invalid_argument);
}

TEST_CASE("decentralized_step: single node with zero rounds reproduces the centralized solver bitwise") {
  const int d = 4;
  SaddlePointProblem p = make_problem(1, d, 1.0, 2.0, 1.5, 0.5, 0.0, 77);
  const GroundTruth t = solve_ground_truth(p);
  const SpectralConstants sc = compute_spectral_constants(p.coupling, false, false);
  const ApdgParameters prm =
      select_parameters(solver_constants(p.constants(), sc), Regime::A);

  const long batch = 3;
  const std::uint64_t seed = 2025;
  const long steps = 25;

  // centralized trajectory
  OracleConfig oracle;
  oracle.kind = OracleConfig::Kind::stochastic;
  oracle.batch_f = batch;
  oracle.batch_g = batch;
  oracle.master_seed = seed;
  const RunTrace central = run(p, prm, oracle, {steps, 0.0}, t);

  // decentralized trajectory with T = 0 on one node
  InexactnessBudget budget;
  budget.r_f = {batch};
  budget.r_g = {batch};
  budget.T = 0;
  budget.delta_prime = 1.0;  // the consensus-error check is inert at n = 1
  const MixingSchedule sched = MixingSchedule::static_graph(edgeless_graph(1));
  DecentralizedState ds = DecentralizedState::initial(
      Eigen::MatrixXd::Zero(d, 1), Eigen::MatrixXd::Zero(d, 1));
  for (long k = 0; k < steps; ++k)
    ds = decentralized_step(ds, prm, budget, p, sched, 0, seed);

  CHECK(ds.X.col(0) == central.final_state.x);
  CHECK(ds.Y.col(0) == central.final_state.y);
  CHECK(ds.X_f.col(0) == central.final_state.x_f);
  CHECK(ds.Y_f.col(0) == central.final_state.y_f);
  CHECK(ds.Y_prev.col(0) == central.final_state.y_prev);
}

TEST_CASE("decentralized_step: identical nodes under exact averaging follow the centralized path") {
  const int n = 3, d = 3;
  // identical nodes: heterogeneity 0 gives every node the same quadratics
  GeneratorSpec spec;
  spec.n = 1;
  spec.dim_x = spec.dim_y = d;
  spec.mu_x = spec.mu_y = 1.0;
  spec.L_x = spec.L_y = 2.0;
  spec.L_xy = 1.0;
  spec.seed = 4;
  const SaddlePointProblem base = generate_problem(spec);
  SaddlePointProblem p = base;
  p.f.assign(n, base.f[0]);
  p.g.assign(n, base.g[0]);
  p.noise.sigma_f2.assign(n, 0.0);
  p.noise.sigma_g2.assign(n, 0.0);

  const GroundTruth t = solve_ground_truth(p);
  const SpectralConstants sc = compute_spectral_constants(p.coupling, false, false);
  const ApdgParameters prm =
      select_parameters(solver_constants(p.constants(), sc), Regime::A);

  InexactnessBudget budget;
  budget.r_f.assign(n, 1);
  budget.r_g.assign(n, 1);
  budget.T = 1;
  budget.delta_prime = 1.0;
  // K3 metropolis is the exact averaging matrix
  const MixingSchedule sched = MixingSchedule::static_graph(complete_graph(n));

  DecentralizedState ds = DecentralizedState::initial(
      Eigen::MatrixXd::Zero(d, n), Eigen::MatrixXd::Zero(d, n));
  const RunTrace central = run(base, prm, {}, {30, 0.0}, t);

  for (long k = 0; k < 30; ++k) {
    ds = decentralized_step(ds, prm, budget, p, sched, k, 1);
    CHECK(ds.consensus_error_x <= 1e-11 * (1.0 + ds.X.norm()));
    CHECK(ds.consensus_error_y <= 1e-11 * (1.0 + ds.Y.norm()));
  }
  const SolverState avg = average_view(ds);
  CHECK((avg.x - central.final_state.x).norm() <=
        1e-11 * (1.0 + central.final_state.x.norm()));
  CHECK((avg.y - central.final_state.y).norm() <=
        1e-11 * (1.0 + central.final_state.y.norm()));
}

TEST_CASE("mean trajectory matches the centralized run under matched noise") {
  // heterogeneous nodes, exact averaging each iteration, identical noise
  // streams: the averaged trajectory must track the centralized one
  const int n = 3, d = 4;
  const SaddlePointProblem p = make_problem(n, d, 0.5, 2.0, 1.5, 0.3, 0.3, 61);
  const GroundTruth t = solve_ground_truth(p);
  const SpectralConstants sc =
      compute_spectral_constants(p.coupling, false, false);
  const ApdgParameters prm =
      select_parameters(solver_constants(p.constants(), sc), Regime::A);

  const long batch = 2, steps = 60;
  const std::uint64_t seed = 314;

  OracleConfig oracle;
  oracle.kind = OracleConfig::Kind::stochastic;
  oracle.batch_f = batch;
  oracle.batch_g = batch;
  oracle.master_seed = seed;
  const RunTrace central = run(p, prm, oracle, {steps, 0.0}, t);

  InexactnessBudget budget;
  budget.r_f.assign(n, batch);
  budget.r_g.assign(n, batch);
  budget.T = 1;
  budget.delta_prime = 1.0;
  const MixingSchedule sched = MixingSchedule::static_graph(complete_graph(n));
  DecentralizedState ds = DecentralizedState::initial(
      Eigen::MatrixXd::Zero(d, n), Eigen::MatrixXd::Zero(d, n));
  for (long k = 0; k < steps; ++k)
    ds = decentralized_step(ds, prm, budget, p, sched, k, seed);

  const SolverState avg = average_view(ds);
  const double scale = 1.0 + central.final_state.x.norm();
  CHECK((avg.x - central.final_state.x).norm() <= 1e-8 * scale);
  CHECK((avg.y - central.final_state.y).norm() <= 1e-8 * scale);
}

TEST_CASE("decentralized_step: theta = 0 ignores the dual history") {
  Setup s = make_setup(3, 3, 1.0, 2.0, 1.0, 0.0, 0.0, 1e-2, 10);
  ApdgParameters prm = s.params;
  prm.theta = 0.0;
  DecentralizedState a = DecentralizedState::initial(
      Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3));
  DecentralizedState b = a;
  b.Y_prev = Eigen::MatrixXd::Constant(3, 3, 5.0);
  const DecentralizedState na =
      decentralized_step(a, prm, s.budget, s.problem, s.schedule, 0, 3);
  const DecentralizedState nb =
      decentralized_step(b, prm, s.budget, s.problem, s.schedule, 0, 3);
  CHECK(na.X == nb.X);
  CHECK(na.Y == nb.Y);
}

TEST_CASE("average_view: equal columns and mean identities") {
  DecentralizedState s;
  s.X = Eigen::VectorXd::LinSpaced(3, 0.0, 2.0).replicate(1, 4);
  s.X_f = s.X;
  s.Y = Eigen::MatrixXd::Random(2, 4);
  s.Y_f = s.Y;
  s.Y_prev = s.Y;
  const SolverState v = average_view(s);
  CHECK((v.x - s.X.col(0)).cwiseAbs().maxCoeff() <= 1e-15);

  // two ways of computing the mean agree
  const Eigen::VectorXd direct = s.Y * Eigen::VectorXd::Constant(4, 0.25);
  CHECK((v.y - direct).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("average_view: one step commutes with averaging") {
  // the column mean of a decentralized step equals the averaged-value update
  // driven by the same gradient matrices
  Setup s = make_setup(4, 3, 0.5, 2.0, 1.5, 0.0, 0.3, 1e-2, 19);
  const int n = 4, d = 3;

  NoiseStream rng(12, 0, StreamVar::probe, 0);
  DecentralizedState st;
  auto near_consensus = [&](int rows) {
    Eigen::MatrixXd M = rng.normal_vector(rows).replicate(1, n);
    for (int j = 0; j < n; ++j) M.col(j) += 1e-3 * rng.normal_vector(rows);
    return M;
  };
  st.X = near_consensus(d);
  st.X_f = near_consensus(d);
  st.Y = near_consensus(d);
  st.Y_f = near_consensus(d);
  st.Y_prev = near_consensus(d);

  InexactnessBudget budget = s.budget;
  budget.T = 2;
  budget.delta_prime = 1.0;  // keep the diagnostic check out of the way

  const ApdgParameters& prm = s.params;
  const DecentralizedState ns =
      decentralized_step(st, prm, budget, s.problem, s.schedule, 0, 8);
  const SolverState got = average_view(ns);

  // averaged-value update: same lines on the column means with the averaged
  // exact per-node gradients (sigma = 0 here)
  const Eigen::MatrixXd Xg = prm.tau_x * st.X + (1.0 - prm.tau_x) * st.X_f;
  const Eigen::MatrixXd Yg = prm.tau_y * st.Y + (1.0 - prm.tau_y) * st.Y_f;
  Eigen::VectorXd gf = Eigen::VectorXd::Zero(d), gg = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    gf += exact_gradient_f(s.problem, i, Xg.col(i));
    gg += exact_gradient_g(s.problem, i, Yg.col(i));
  }
  gf /= n;
  gg /= n;
  const Eigen::VectorXd xb = st.X.rowwise().mean();
  const Eigen::VectorXd xfb = st.X_f.rowwise().mean();
  const Eigen::VectorXd yb = st.Y.rowwise().mean();
  const Eigen::VectorXd yfb = st.Y_f.rowwise().mean();
  const Eigen::VectorXd ypb = st.Y_prev.rowwise().mean();
  const Eigen::MatrixXd& A = s.problem.coupling;

  const Eigen::VectorXd ymb = yb + prm.theta * (yb - ypb);
  const Eigen::VectorXd xgb = prm.tau_x * xb + (1.0 - prm.tau_x) * xfb;
  const Eigen::VectorXd ygb = prm.tau_y * yb + (1.0 - prm.tau_y) * yfb;
  const Eigen::VectorXd ub =
      xb + prm.eta_x * prm.alpha_x * (xgb - xb) -
      prm.eta_x * prm.beta_x * (A.transpose() * (A * xb - gg)) -
      prm.eta_x * (gf + A.transpose() * ymb);
  const Eigen::VectorXd wb = yb + prm.eta_y * prm.alpha_y * (ygb - yb) -
                             prm.eta_y * prm.beta_y * (A * (A.transpose() * yb + gf)) -
                             prm.eta_y * (gg - A * ub);
  const Eigen::VectorXd xf_next = xgb + prm.sigma_x * (ub - xb);
  const Eigen::VectorXd yf_next = ygb + prm.sigma_y * (wb - yb);

  const double scale = 1.0 + ub.norm() + wb.norm();
  CHECK((got.x - ub).norm() <= 1e-12 * scale);
  CHECK((got.y - wb).norm() <= 1e-12 * scale);
  CHECK((got.x_f - xf_next).norm() <= 1e-12 * scale);
  CHECK((got.y_f - yf_next).norm() <= 1e-12 * scale);
}

TEST_CASE("decentralized_step: consensus means are preserved by projection") {
  Setup s = make_setup(5, 3, 1.0, 2.0, 1.0, 0.1, 0.2, 1e-2, 23);
  DecentralizedState st = DecentralizedState::initial(
      Eigen::MatrixXd::Zero(3, 5), Eigen::MatrixXd::Zero(3, 5));
  // one step: column means of X^{k+1} equal column means of U^{k+1}; verify
  // through a T = 0 twin sharing the same seed
  InexactnessBudget no_rounds = s.budget;
  no_rounds.T = 0;
  no_rounds.delta_prime = 1e6;
  const DecentralizedState with_rounds =
      decentralized_step(st, s.params, s.budget, s.problem, s.schedule, 0, 5);
  const DecentralizedState without =
      decentralized_step(st, s.params, no_rounds, s.problem, s.schedule, 0, 5);
  const Eigen::VectorXd mean_with = with_rounds.X.rowwise().mean();
  const Eigen::VectorXd mean_without = without.X.rowwise().mean();
  CHECK((mean_with - mean_without).cwiseAbs().maxCoeff() <=
        1e-12 * (1.0 + mean_without.cwiseAbs().maxCoeff()));
}

TEST_CASE("decentralized_step: budget violation raises a diagnostic") {
  Setup s = make_setup(3, 3, 0.5, 2.0, 1.0, 0.0, 0.4, 1e-3, 29);
  InexactnessBudget tight = s.budget;
  tight.T = 0;             // no projection
  tight.delta_prime = 1e-22;  // admissible error effectively zero
  DecentralizedState st = DecentralizedState::initial(
      Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3));
  // heterogeneous gradients spread the nodes immediately
  CHECK_THROWS_AS(
      decentralized_step(st, s.params, tight, s.problem, s.schedule, 0, 1),
      std::runtime_error);
}

TEST_CASE("run_decentralized: counters are exact bookkeeping") {
  const SaddlePointProblem p = make_problem(4, 3, 1.0, 2.0, 1.0, 0.05, 0.0, 31);
  const MixingSchedule sched = MixingSchedule::static_graph(ring_graph(4));
  const ContractionCertificate cert = certify_contraction(sched, 1, 1);
  const DecentralizedTrace trace =
      run_decentralized(p, sched, cert, 1e-2, Regime::A, 7);
  CHECK(trace.communications == trace.budget.N * trace.budget.T);
  for (int i = 0; i < 4; ++i) {
    CHECK(trace.oracle_samples_f[i] == trace.budget.N * trace.budget.r_f[i]);
    CHECK(trace.oracle_samples_g[i] == trace.budget.N * trace.budget.r_g[i]);
  }
  CHECK(static_cast<long>(trace.records.size()) == trace.budget.N);
}

TEST_CASE("run_decentralized: consensus maintenance and spread bounds over seeds") {
  const SaddlePointProblem p = make_problem(4, 3, 1.0, 2.0, 1.5, 0.05, 0.2, 37);
  const MixingSchedule sched = MixingSchedule::static_graph(ring_graph(4));
  const ContractionCertificate cert = certify_contraction(sched, 1, 1);

  const int seeds = 10;
  std::vector<double> cons_sum, spread_sum;
  InexactnessBudget budget;
  double mean_final = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const DecentralizedTrace trace = run_decentralized(
        p, sched, cert, 1e-2, Regime::A, 100 + static_cast<std::uint64_t>(s));
    budget = trace.budget;
    if (cons_sum.size() < trace.records.size()) {
      cons_sum.resize(trace.records.size(), 0.0);
      spread_sum.resize(trace.records.size(), 0.0);
    }
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
      cons_sum[k] += std::max(trace.records[k].cons_err_x,
                              trace.records[k].cons_err_y);
      spread_sum[k] +=
          std::max(trace.records[k].spread_u, trace.records[k].spread_w);
    }
    mean_final += trace.final_max_dist;
  }
  mean_final /= seeds;

  const double maintenance = std::sqrt(budget.delta_prime) * 1.1;
  for (double sum : cons_sum) CHECK(sum / seeds <= maintenance);
  for (double sum : spread_sum) CHECK(sum / seeds <= budget.D);

  // final averaged distances obey the planned bound with a factor-2 slack
  CHECK(mean_final <= 1e-2);
  CHECK(mean_final <= 2.0 * std::max(budget.M_x * budget.M_x,
                                     budget.M_y * budget.M_y));
}
