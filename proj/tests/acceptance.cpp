// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerance in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

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

SolverConstants random_constants(NoiseStream& rng) {
  auto logu = [&rng](double lo, double hi) {
    return lo * std::pow(hi / lo, rng.uniform());
  };
  SolverConstants c;
  c.mu_x = logu(1e-3, 1.0);
  c.L_x = c.mu_x * logu(1.0, 1e3);
  c.mu_y = logu(1e-3, 1.0);
  c.L_y = c.mu_y * logu(1.0, 1e3);
  c.L_xy = logu(1e-2, 1e2);
  c.mu_xy = c.L_xy / logu(1.0, 1e2);
  c.mu_yx = c.L_xy / logu(1.0, 1e2);
  return c;
}

// 1. Deterministic linear convergence: psi^{k+1} <= theta psi^k + 1e-9 psi^0
//    on 20 random 10-dimensional instances over 500 steps each.
bool criterion_deterministic_contraction(std::string& detail) {
  int violations = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    NoiseStream rng(seed, 0, StreamVar::probe, 1);
    const double mu_x = 0.05 + rng.uniform();
    const double mu_y = 0.05 + rng.uniform();
    GeneratorSpec spec;
    spec.n = 2;
    spec.dim_x = spec.dim_y = 10;
    spec.mu_x = mu_x;
    spec.L_x = mu_x * (1.0 + 9.0 * rng.uniform());
    spec.mu_y = mu_y;
    spec.L_y = mu_y * (1.0 + 9.0 * rng.uniform());
    spec.L_xy = 0.2 + 3.0 * rng.uniform();
    spec.heterogeneity = 0.3;
    spec.seed = seed;
    const SaddlePointProblem p = generate_problem(spec);
    const GroundTruth t = solve_ground_truth(p);
    const SpectralConstants sc =
        compute_spectral_constants(p.coupling, false, false);
    const ApdgParameters prm =
        select_parameters(solver_constants(p.constants(), sc), Regime::A);
    const RunTrace trace = run(p, prm, {}, {500, 0.0}, t);
    const double psi0 = trace.records.front().psi;
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
      const double excess = trace.records[k + 1].psi -
                            (prm.theta * trace.records[k].psi + 1e-9 * psi0);
      if (excess > 0.0) {
        ++violations;
        worst = std::max(worst, excess / (psi0 > 0 ? psi0 : 1.0));
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "20 instances x 500 steps, violations=%d worst=%.2e",
                violations, worst);
  detail = buf;
  return violations == 0;
}

// 2. Rate-bound consistency: 1/(1-theta) <= explicit bound, exact inequality,
//    1000 random tuples, every feasible regime.
bool criterion_rate_bound_consistency(std::string& detail) {
  NoiseStream rng(271828, 0, StreamVar::probe, 0);
  int checked = 0, violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const SolverConstants c = random_constants(rng);
    for (Regime r : {Regime::A, Regime::B, Regime::C, Regime::D}) {
      if (!regime_feasible(c, r)) continue;
      const ApdgParameters p = select_parameters(c, r);
      ++checked;
      if (1.0 / (1.0 - p.theta) > predict_rate_bound(c, r)) ++violations;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d regime selections, violations=%d",
                checked, violations);
  detail = buf;
  return violations == 0 && checked >= 1000;
}

// 3. Bias error floor: injected (delta_x, delta_y) = 1e-4 each; the psi
//    plateau over the last 100 of 2000 iterations stays within
//    4(delta_x+delta_y)/(1-theta)^2 x 1.1.
bool criterion_bias_error_floor(std::string& detail) {
  const SaddlePointProblem p = make_problem(1, 4, 1.0, 2.0, 1.5, 0.0, 0.0, 33);
  const GroundTruth t = solve_ground_truth(p);
  const SpectralConstants sc =
      compute_spectral_constants(p.coupling, false, false);
  const ProblemConstants c = p.constants();

  const double delta = 1e-4;
  const double bf = std::sqrt(delta / (1.0 / c.mu_x + 1.0 / (2.0 * c.L_x)));
  const double bg = std::sqrt(delta / (1.0 / c.mu_y + 1.0 / (2.0 * c.L_y)));
  const ApdgParameters prm = select_parameters(
      hatted_constants(solver_constants(c, sc)), Regime::A);

  OracleConfig oracle;
  oracle.kind = OracleConfig::Kind::biased;
  oracle.bias_f = Eigen::VectorXd::Unit(4, 0) * bf;
  oracle.bias_g = Eigen::VectorXd::Unit(4, 1) * bg;

  const RunTrace trace = run(p, prm, oracle, {2000, 0.0}, t);
  double plateau = 0.0;
  for (std::size_t k = trace.records.size() - 100; k < trace.records.size();
       ++k)
    plateau = std::max(plateau, trace.records[k].psi);
  const double bound =
      4.0 * (delta + delta) / ((1.0 - prm.theta) * (1.0 - prm.theta));
  char buf[128];
  std::snprintf(buf, sizeof(buf), "plateau=%.3e bound=%.3e x1.1", plateau,
                bound);
  detail = buf;
  return plateau <= bound * 1.1;
}

// 4. Stochastic target accuracy at the predicted iteration count and batch
//    sizes: 30-seed mean of max squared distances <= eps = 1e-3.
bool criterion_stochastic_accuracy(std::string& detail) {
  const double eps = 1e-3;
  const SaddlePointProblem p = make_problem(1, 10, 1.0, 2.0, 2.0, 1.0, 0.0, 44);
  const GroundTruth t = solve_ground_truth(p);
  const SpectralConstants sc =
      compute_spectral_constants(p.coupling, false, false);
  const SolverConstants c = solver_constants(p.constants(), sc);
  const ApdgParameters prm = select_parameters(c, Regime::A);

  const BatchSizes bs = compute_batch_sizes(prm.effective, prm.omega,
                                            prm.theta, eps, 1.0, 1.0);
  const double nu = noise_balance(prm.omega, sc.L_xy);
  const double psi0 =
      lyapunov(SolverState::initial(Eigen::VectorXd::Zero(10),
                                    Eigen::VectorXd::Zero(10)),
               prm, t, p)
          .psi;
  const long N = planned_iterations(psi0, nu, prm.theta, eps);

  double mean_final = 0.0;
  for (int s = 0; s < 30; ++s) {
    OracleConfig oracle;
    oracle.kind = OracleConfig::Kind::stochastic;
    oracle.batch_f = bs.r_f;
    oracle.batch_g = bs.r_g;
    oracle.master_seed = 9000 + static_cast<std::uint64_t>(s);
    const RunTrace trace = run(p, prm, oracle, {N, 0.0}, t);
    const auto& last = trace.records.back();
    mean_final += std::max(last.dist_x2, last.dist_y2);
  }
  mean_final /= 30.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "N=%ld r_f=%ld r_g=%ld mean=%.3e eps=%.0e",
                N, bs.r_f, bs.r_g, mean_final, eps);
  detail = buf;
  return mean_final <= eps;
}

// 5. Decentralized epsilon-solution on a certified 5-node ring with the
//    planned N and T; consensus error <= sqrt(delta') x 1.1 in seed-mean.
bool criterion_decentralized_epsilon(std::string& detail) {
  const double eps = 1e-3;
  const SaddlePointProblem p =
      make_problem(5, 10, 1.0, 2.0, 2.0, 0.1, 0.2, 55);
  const MixingSchedule sched = MixingSchedule::static_graph(ring_graph(5));
  const ContractionCertificate cert = certify_contraction(sched, 1, 1);

  const int seeds = 30;
  double mean_final = 0.0;
  std::vector<double> cons_sum;
  InexactnessBudget budget;
  for (int s = 0; s < seeds; ++s) {
    const DecentralizedTrace trace = run_decentralized(
        p, sched, cert, eps, Regime::A, 500 + static_cast<std::uint64_t>(s));
    budget = trace.budget;
    mean_final += trace.final_max_dist;
    if (cons_sum.size() < trace.records.size())
      cons_sum.resize(trace.records.size(), 0.0);
    for (std::size_t k = 0; k < trace.records.size(); ++k)
      cons_sum[k] += std::max(trace.records[k].cons_err_x,
                              trace.records[k].cons_err_y);
  }
  mean_final /= seeds;
  double worst_cons = 0.0;
  for (double sum : cons_sum) worst_cons = std::max(worst_cons, sum / seeds);
  const double maintenance = std::sqrt(budget.delta_prime) * 1.1;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "N=%ld T=%ld mean=%.3e eps=%.0e cons=%.2e limit=%.2e",
                budget.N, budget.T, mean_final, eps, worst_cons, maintenance);
  detail = buf;
  return mean_final <= eps && worst_cons <= maintenance;
}

// 6. Asymmetric-mu scaling: iterations-to-eps on a 5x5 grid spanning a 1e4
//    mu ratio fit 1/sqrt(mu_x mu_y) with R^2 >= 0.95 and beat the
//    1/min{mu_x,mu_y} model at the extreme off-diagonal cells.
bool criterion_asymmetric_scaling(std::string& detail) {
  SweepSpec spec;
  for (int i = 0; i < 5; ++i)
    spec.mu_x_grid.push_back(1e-2 * std::pow(1e2, i / 4.0));
  spec.mu_y_grid = spec.mu_x_grid;
  spec.L_xy = 10.0;
  spec.coupling_span = 1e3;
  spec.dim = 10;
  spec.eps = 1e-10;
  spec.max_iters = 3000000;
  spec.seed = 66;
  const SweepResult result = run_sweep(spec);

  int converged = 0;
  for (const SweepCell& cell : result.cells)
    if (!cell.diverged) ++converged;

  // mu_x/mu_y runs from 1e-2 to 1e2 over the grid: a 1e4 span of ratios
  const double ratio_span = result.max_ratio * result.max_ratio;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "R2(geo)=%.4f slope=%.3f ratio_span=%.0e extremes=%s",
                result.geometric_fit.r_squared, result.geometric_fit.slope,
                ratio_span, result.extremes_favor_geometric ? "geo" : "min");
  detail = buf;
  return converged == 25 && result.geometric_fit.r_squared >= 0.95 &&
         result.extremes_favor_geometric && ratio_span >= 1e4 - 1e-6;
}

// 7. Reduction identities: single-node zero-round decentralized run is bit
//    identical to the centralized solver; averaging commutes with one step
//    to 1e-12.
bool criterion_reduction_identities(std::string& detail) {
  bool bit_identical = true;
  {
    const int d = 4;
    const SaddlePointProblem p = make_problem(1, d, 1.0, 2.0, 1.5, 0.5, 0.0, 77);
    const GroundTruth t = solve_ground_truth(p);
    const SpectralConstants sc =
        compute_spectral_constants(p.coupling, false, false);
    const ApdgParameters prm =
        select_parameters(solver_constants(p.constants(), sc), Regime::A);
    const long batch = 3, steps = 40;
    const std::uint64_t seed = 2025;

    OracleConfig oracle;
    oracle.kind = OracleConfig::Kind::stochastic;
    oracle.batch_f = batch;
    oracle.batch_g = batch;
    oracle.master_seed = seed;
    const RunTrace central = run(p, prm, oracle, {steps, 0.0}, t);

    InexactnessBudget budget;
    budget.r_f = {batch};
    budget.r_g = {batch};
    budget.T = 0;
    budget.delta_prime = 1.0;
    const MixingSchedule sched =
        MixingSchedule::static_graph(edgeless_graph(1));
    DecentralizedState ds = DecentralizedState::initial(
        Eigen::MatrixXd::Zero(d, 1), Eigen::MatrixXd::Zero(d, 1));
    for (long k = 0; k < steps; ++k)
      ds = decentralized_step(ds, prm, budget, p, sched, 0, seed);

    bit_identical = ds.X.col(0) == central.final_state.x &&
                    ds.Y.col(0) == central.final_state.y &&
                    ds.X_f.col(0) == central.final_state.x_f &&
                    ds.Y_f.col(0) == central.final_state.y_f &&
                    ds.Y_prev.col(0) == central.final_state.y_prev;
  }

  double commute_err = 0.0;
  {
    const int n = 4, d = 3;
    const SaddlePointProblem p = make_problem(n, d, 0.5, 2.0, 1.5, 0.0, 0.3, 19);
    const SpectralConstants sc =
        compute_spectral_constants(p.coupling, false, false);
    const ApdgParameters prm = select_parameters(
        hatted_constants(solver_constants(p.constants(), sc)), Regime::A);
    const MixingSchedule sched = MixingSchedule::static_graph(ring_graph(n));

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

    InexactnessBudget budget;
    budget.r_f.assign(n, 1);
    budget.r_g.assign(n, 1);
    budget.T = 2;
    budget.delta_prime = 1.0;

    const DecentralizedState ns =
        decentralized_step(st, prm, budget, p, sched, 0, 8);
    const SolverState got = average_view(ns);

    const Eigen::MatrixXd Xg = prm.tau_x * st.X + (1.0 - prm.tau_x) * st.X_f;
    const Eigen::MatrixXd Yg = prm.tau_y * st.Y + (1.0 - prm.tau_y) * st.Y_f;
    Eigen::VectorXd gf = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd gg = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) {
      gf += exact_gradient_f(p, i, Xg.col(i));
      gg += exact_gradient_g(p, i, Yg.col(i));
    }
    gf /= n;
    gg /= n;
    const Eigen::VectorXd xb = st.X.rowwise().mean();
    const Eigen::VectorXd xfb = st.X_f.rowwise().mean();
    const Eigen::VectorXd yb = st.Y.rowwise().mean();
    const Eigen::VectorXd yfb = st.Y_f.rowwise().mean();
    const Eigen::VectorXd ypb = st.Y_prev.rowwise().mean();
    const Eigen::MatrixXd& A = p.coupling;

    const Eigen::VectorXd ymb = yb + prm.theta * (yb - ypb);
    const Eigen::VectorXd xgb = prm.tau_x * xb + (1.0 - prm.tau_x) * xfb;
    const Eigen::VectorXd ygb = prm.tau_y * yb + (1.0 - prm.tau_y) * yfb;
    const Eigen::VectorXd ub =
        xb + prm.eta_x * prm.alpha_x * (xgb - xb) -
        prm.eta_x * prm.beta_x * (A.transpose() * (A * xb - gg)) -
        prm.eta_x * (gf + A.transpose() * ymb);
    const Eigen::VectorXd wb =
        yb + prm.eta_y * prm.alpha_y * (ygb - yb) -
        prm.eta_y * prm.beta_y * (A * (A.transpose() * yb + gf)) -
        prm.eta_y * (gg - A * ub);
    commute_err = std::max((got.x - ub).norm(), (got.y - wb).norm());
  }

  char buf[128];
  std::snprintf(buf, sizeof(buf), "bitwise=%s commute_err=%.2e",
                bit_identical ? "yes" : "no", commute_err);
  detail = buf;
  return bit_identical && commute_err <= 1e-12;
}

// 8. Consensus layer: double stochasticity of products, mean preservation to
//    1e-12, certified contraction honored on 1000 probes, Chebyshev error
//    never above plain gossip at matched round counts.
bool criterion_consensus_layer(std::string& detail) {
  bool ok = true;
  std::string why;

  const MixingSchedule rand_sched = MixingSchedule::random_switching(6, 0.3, 4);
  NoiseStream rng(64, 0, StreamVar::probe, 0);
  for (int trial = 0; trial < 100 && ok; ++trial) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(6, 6);
    const long start = static_cast<long>(rng.uniform_index(64));
    for (int s = 0; s < 3; ++s) P = P * rand_sched.matrix(start + s);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(6);
    if ((P * ones - ones).cwiseAbs().maxCoeff() > 1e-10 ||
        (P.transpose() * ones - ones).cwiseAbs().maxCoeff() > 1e-10) {
      ok = false;
      why = "product stochasticity";
    }
  }

  for (int trial = 0; trial < 100 && ok; ++trial) {
    Eigen::MatrixXd X(4, 6);
    for (int j = 0; j < 6; ++j) X.col(j) = rng.normal_vector(4);
    const long T = static_cast<long>(rng.uniform_index(10));
    const Eigen::MatrixXd Z = consensus(X, rand_sched, trial, T);
    if ((Z.rowwise().mean() - X.rowwise().mean()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + X.cwiseAbs().maxCoeff())) {
      ok = false;
      why = "mean preservation";
    }
  }

  // certified contraction on a periodic two-phase six ring
  Graph even{6, {{0, 1}, {2, 3}, {4, 5}}};
  Graph odd{6, {{1, 2}, {3, 4}, {5, 0}}};
  const MixingSchedule periodic = MixingSchedule::periodic({even, odd});
  const ContractionCertificate cert = certify_contraction(periodic, 2, 16);
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    Eigen::MatrixXd X(4, 6);
    for (int j = 0; j < 6; ++j) X.col(j) = rng.normal_vector(4);
    const long start = static_cast<long>(rng.uniform_index(32));
    const Eigen::MatrixXd Z = consensus(X, periodic, start, cert.tau);
    const Eigen::MatrixXd Xb = X.rowwise().mean().replicate(1, 6);
    const Eigen::MatrixXd Zb = Z.rowwise().mean().replicate(1, 6);
    if ((Z - Zb).norm() > (1.0 - cert.lambda) * (X - Xb).norm() + 1e-12) {
      ok = false;
      why = "certified contraction";
    }
  }

  const Eigen::MatrixXd W = metropolis_weights(ring_graph(16));
  const MixingSchedule ring16 = MixingSchedule::static_graph(ring_graph(16));
  Eigen::MatrixXd X(4, 16);
  for (int j = 0; j < 16; ++j) X.col(j) = rng.normal_vector(4);
  auto err = [](const Eigen::MatrixXd& Z) {
    return (Z - Eigen::MatrixXd(Z.rowwise().mean().replicate(1, Z.cols())))
        .norm();
  };
  for (int T : {5, 10, 20}) {
    const double cheb = err(chebyshev_consensus(X, W, T));
    const double plain = err(consensus(X, ring16, 0, T));
    if (cheb > plain + 1e-12) {
      ok = false;
      why = "chebyshev vs gossip";
    }
  }

  detail = ok ? "products, means, contraction, chebyshev all hold" : why;
  return ok;
}

// 9. Model sandwich: the consensus model triple satisfies the two-sided
//    inequality on 1000 random probes per instance.
bool criterion_model_sandwich(std::string& detail) {
  int violations = 0;
  for (std::uint64_t seed : {17u, 23u, 29u}) {
    GeneratorSpec spec;
    spec.n = 4;
    spec.dim_x = spec.dim_y = 3;
    spec.mu_x = spec.mu_y = 0.5;
    spec.L_x = spec.L_y = 2.5;
    spec.L_xy = 1.0;
    spec.heterogeneity = 0.4;
    spec.seed = seed;
    const SaddlePointProblem p = generate_problem(spec);
    const ProblemConstants c = p.constants();
    const QuadraticFunction fbar = p.averaged_f();
    const double delta_prime = 0.05;
    NoiseStream rng(seed, 0, StreamVar::probe, 9);

    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd center = rng.normal_vector(3);
      Eigen::MatrixXd E(3, 4);
      for (int i = 0; i < 4; ++i) E.col(i) = rng.normal_vector(3);
      E.colwise() -= Eigen::VectorXd(E.rowwise().mean());
      if (E.norm() > 0) E *= 0.95 * std::sqrt(delta_prime) / E.norm();
      const Eigen::MatrixXd X = center.replicate(1, 4) + E;

      const ConsensusModel m = consensus_model_of_f(p, X, delta_prime);
      const Eigen::VectorXd xbar = X.rowwise().mean();
      const Eigen::VectorXd probe =
          xbar + rng.normal_vector(3) * (trial % 7 + 1);
      const double gap =
          fbar.value(probe) - m.value - m.gradient.dot(probe - xbar);
      const double dist2 = (probe - xbar).squaredNorm();
      const double slack = 1e-9 * (1.0 + std::abs(gap) + dist2);
      if (gap < c.mu_x / 4.0 * dist2 - slack ||
          gap > c.L_x * dist2 + m.delta + slack)
        ++violations;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "3 instances x 1000 probes, violations=%d",
                violations);
  detail = buf;
  return violations == 0;
}

struct Criterion {
  const char* name;
  std::function<bool(std::string&)> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"deterministic linear convergence", criterion_deterministic_contraction},
      {"rate-bound consistency", criterion_rate_bound_consistency},
      {"bias error floor", criterion_bias_error_floor},
      {"stochastic target accuracy", criterion_stochastic_accuracy},
      {"decentralized epsilon-solution", criterion_decentralized_epsilon},
      {"asymmetric-mu scaling", criterion_asymmetric_scaling},
      {"reduction identities", criterion_reduction_identities},
      {"consensus layer", criterion_consensus_layer},
      {"model sandwich", criterion_model_sandwich},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool passed = false;
    try {
      passed = criteria[i].fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%zu/9] %s %-34s (%s; %.1fs)\n", i + 1,
                passed ? "PASS" : "FAIL", criteria[i].name, detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!passed) ++failures;
  }
  return failures;
}
