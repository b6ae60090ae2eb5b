#include "saddle/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

namespace saddle {

namespace {

std::optional<Regime> regime_from_string(const std::string& s) {
  if (s == "auto" || s.empty()) return std::nullopt;
  if (s == "A") return Regime::A;
  if (s == "B") return Regime::B;
  if (s == "C") return Regime::C;
  if (s == "D") return Regime::D;
  throw std::runtime_error("config: unknown regime '" + s + "'");
}

GeneratorSpec generator_from_json(const Json& j) {
  GeneratorSpec g;
  g.n = j.value("n", 1);
  g.dim_x = j.value("dim_x", 2);
  g.dim_y = j.value("dim_y", 2);
  g.mu_x = j.value("mu_x", 1.0);
  g.L_x = j.value("L_x", 1.0);
  g.mu_y = j.value("mu_y", 1.0);
  g.L_y = j.value("L_y", 1.0);
  g.L_xy = j.value("L_xy", 1.0);
  g.sigma_f2 = j.value("sigma_f2", 0.0);
  g.sigma_g2 = j.value("sigma_g2", 0.0);
  g.heterogeneity = j.value("heterogeneity", 0.0);
  g.seed = j.value("seed", std::uint64_t{0});
  return g;
}

std::string seed_suffixed(const std::string& path, int index, int total) {
  if (total <= 1 || path.empty()) return path;
  const auto dot = path.find_last_of('.');
  const std::string stem = dot == std::string::npos ? path : path.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  return stem + "_s" + std::to_string(index) + ext;
}

bool wants_check(const RunConfig& c, const std::string& name) {
  return std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end();
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  const std::string mode = j.value("mode", "centralized");
  if (mode == "centralized")
    c.mode = RunConfig::Mode::centralized;
  else if (mode == "decentralized")
    c.mode = RunConfig::Mode::decentralized;
  else
    throw std::runtime_error("config: unknown mode '" + mode + "'");
  if (j.contains("problem")) c.problem_path = j.at("problem").get<std::string>();
  if (j.contains("generator")) c.generator = generator_from_json(j.at("generator"));
  if (c.problem_path.empty() && !c.generator)
    throw std::runtime_error("config: need a 'problem' path or a 'generator' block");
  if (j.contains("schedule")) c.schedule_path = j.at("schedule").get<std::string>();
  c.tau = j.value("tau", 1);
  c.certify_trials = j.value("certify_trials", 200);
  c.eps = j.value("eps", 1e-3);
  c.regime = regime_from_string(j.value("regime", "auto"));
  c.seed = j.value("seed", std::uint64_t{1});
  c.seeds = j.value("seeds", 1);
  c.max_iters = j.value("max_iters", long{200000});
  c.out_trace = j.value("out_trace", "");
  c.out_summary = j.value("out_summary", "");
  const std::string fmt = j.value("format", "csv");
  if (fmt == "csv")
    c.format = TraceFormat::csv;
  else if (fmt == "structured")
    c.format = TraceFormat::structured;
  else
    throw std::runtime_error("config: unknown format '" + fmt + "'");
  if (j.contains("checks"))
    for (const Json& chk : j.at("checks"))
      c.checks.push_back(chk.get<std::string>());
  return c;
}

namespace {

RunReport execute_centralized(const RunConfig& config,
                              const SaddlePointProblem& problem,
                              const GroundTruth& truth,
                              const SpectralConstants& sc, Json& summary) {
  RunReport report;
  const SolverConstants sol = solver_constants(problem.constants(), sc);
  const ApdgParameters params = config.regime
                                    ? select_parameters(sol, *config.regime)
                                    : select_parameters_auto(sol);
  summary["params"] = params_to_json(params);
  summary["predictions"] = Json{
      {"rate_bound", predict_rate_bound(sol, params.regime)},
      {"rate_factor", 1.0 / (1.0 - params.theta)}};
  if (sol.mu_x > 0.0 && sol.mu_y > 0.0)
    summary["predictions"]["lower_bound"] = predict_lower_bound(sol, config.eps);

  const double sf2 = problem.noise.global_sigma_f2();
  const double sg2 = problem.noise.global_sigma_g2();
  const bool noisy =
      problem.noise.model != NoiseModel::none && (sf2 > 0.0 || sg2 > 0.0);

  const double nu = noise_balance(params.omega, sc.L_xy);
  const SolverState zero_state = SolverState::initial(
      Eigen::VectorXd::Zero(problem.dim_x()),
      Eigen::VectorXd::Zero(problem.dim_y()));
  const double psi0 = lyapunov(zero_state, params, truth, problem).psi;

  OracleConfig oracle;
  StopRule stop;
  long planned_n = 0;
  if (noisy) {
    const BatchSizes bs = compute_batch_sizes(sol, params.omega, params.theta,
                                              config.eps, sf2, sg2);
    planned_n = planned_iterations(psi0, nu, params.theta, config.eps);
    oracle.kind = OracleConfig::Kind::stochastic;
    oracle.batch_f = bs.r_f;
    oracle.batch_g = bs.r_g;
    stop.max_iters = std::min(planned_n, config.max_iters);
    stop.target_eps = 0.0;  // evaluate at the predicted N
    summary["plan"] = Json{{"r_f", bs.r_f}, {"r_g", bs.r_g},
                           {"N", planned_n}, {"psi0", psi0}, {"nu", nu}};
  } else {
    oracle.kind = OracleConfig::Kind::exact;
    stop.max_iters = config.max_iters;
    stop.target_eps = config.eps;
    summary["plan"] = Json{{"psi0", psi0}, {"nu", nu}};
  }

  double mean_final = 0.0;
  double worst_contraction_excess = -1.0;
  Json outcomes = Json::array();
  for (int s = 0; s < config.seeds; ++s) {
    oracle.master_seed = config.seed + static_cast<std::uint64_t>(s);
    const RunTrace trace = run(problem, params, oracle, stop, truth);
    const auto& last = trace.records.back();
    mean_final += std::max(last.dist_x2, last.dist_y2);
    outcomes.push_back(Json{{"seed", oracle.master_seed},
                            {"iterations", last.k},
                            {"dist_x2", last.dist_x2},
                            {"dist_y2", last.dist_y2},
                            {"reached_target", trace.reached_target}});
    if (!noisy) {
      const double base = 1e-9 * trace.records.front().psi;
      for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const double excess = trace.records[k + 1].psi -
                              (params.theta * trace.records[k].psi + base);
        worst_contraction_excess = std::max(worst_contraction_excess, excess);
      }
    }
    if (!config.out_trace.empty())
      write_trace(seed_suffixed(config.out_trace, s, config.seeds), trace,
                  config.format);
  }
  mean_final /= config.seeds;
  summary["measured"] =
      Json{{"mean_final_max_dist", mean_final}, {"outcomes", outcomes}};

  if (wants_check(config, "psi_contraction")) {
    CheckResult chk{"psi_contraction", worst_contraction_excess <= 0.0,
                    worst_contraction_excess, 0.0};
    if (noisy) chk.passed = false;  // contraction is only pathwise without noise
    report.checks.push_back(chk);
  }
  if (wants_check(config, "epsilon_criterion"))
    report.checks.push_back({"epsilon_criterion", mean_final <= config.eps,
                             mean_final, config.eps});
  return report;
}

RunReport execute_decentralized(const RunConfig& config,
                                const SaddlePointProblem& problem,
                                const GroundTruth& truth, Json& summary) {
  RunReport report;
  if (config.schedule_path.empty())
    throw std::runtime_error("config: decentralized mode needs a 'schedule' path");
  const ScheduleSpec spec = load_schedule_spec(config.schedule_path);
  const MixingSchedule schedule = build_schedule(spec);
  const ContractionCertificate cert =
      certify_contraction(schedule, config.tau, config.certify_trials);
  summary["certificate"] = Json{{"tau", cert.tau},
                                {"lambda", cert.lambda},
                                {"raw_lambda", cert.raw_lambda},
                                {"spectral", cert.spectral},
                                {"trials", cert.trials}};

  double mean_final = 0.0;
  std::vector<double> cons_err_sums;  // per iteration, summed over seeds
  Json outcomes = Json::array();
  InexactnessBudget budget;
  for (int s = 0; s < config.seeds; ++s) {
    const DecentralizedTrace trace = run_decentralized(
        problem, schedule, cert, config.eps, config.regime,
        config.seed + static_cast<std::uint64_t>(s));
    budget = trace.budget;
    if (s == 0) {
      summary["budget"] = budget_to_json(trace.budget);
      summary["params"] = params_to_json(trace.params);
      const DecentralizedCounts counts = predict_decentralized_counts(
          trace.budget, trace.params.theta,
          static_cast<double>(cert.tau) / cert.lambda);
      summary["predictions"] = Json{{"N", counts.iterations},
                                    {"N_comm", counts.communications},
                                    {"N_comp", counts.node_oracle_calls},
                                    {"kappa", counts.kappa},
                                    {"rate_factor", counts.rate_factor}};
    }
    mean_final += trace.final_max_dist;
    if (cons_err_sums.size() < trace.records.size())
      cons_err_sums.resize(trace.records.size(), 0.0);
    for (std::size_t k = 0; k < trace.records.size(); ++k)
      cons_err_sums[k] +=
          std::max(trace.records[k].cons_err_x, trace.records[k].cons_err_y);
    outcomes.push_back(Json{{"seed", config.seed + s},
                            {"final_max_dist", trace.final_max_dist},
                            {"communications", trace.communications}});
    if (!config.out_trace.empty())
      write_trace(seed_suffixed(config.out_trace, s, config.seeds), trace,
                  config.format);
  }
  mean_final /= config.seeds;

  double worst_mean_cons_err = 0.0;
  for (double sum : cons_err_sums)
    worst_mean_cons_err = std::max(worst_mean_cons_err, sum / config.seeds);

  summary["measured"] = Json{{"mean_final_max_dist", mean_final},
                             {"worst_mean_consensus_error", worst_mean_cons_err},
                             {"outcomes", outcomes}};

  if (wants_check(config, "epsilon_criterion"))
    report.checks.push_back({"epsilon_criterion", mean_final <= config.eps,
                             mean_final, config.eps});
  if (wants_check(config, "consensus_error")) {
    const double bound = std::sqrt(budget.delta_prime) * 1.1;
    report.checks.push_back({"consensus_error", worst_mean_cons_err <= bound,
                             worst_mean_cons_err, bound});
  }
  return report;
}

}  // namespace

RunReport execute_run(const RunConfig& config) {
  const SaddlePointProblem problem = config.generator
                                         ? generate_problem(*config.generator)
                                         : load_problem(config.problem_path);
  const GroundTruth truth = solve_ground_truth(problem);
  const SpectralConstants sc = compute_spectral_constants(
      problem.coupling, problem.range_g_in_A, problem.range_f_in_At);

  Json summary;
  const ProblemConstants pc = problem.constants();
  summary["problem"] = Json{{"n", problem.nodes()},
                            {"dim_x", problem.dim_x()},
                            {"dim_y", problem.dim_y()},
                            {"L_x", pc.L_x}, {"mu_x", pc.mu_x},
                            {"L_y", pc.L_y}, {"mu_y", pc.mu_y},
                            {"L_xy", sc.L_xy}, {"mu_xy", sc.mu_xy},
                            {"mu_yx", sc.mu_yx},
                            {"ground_truth_residual", truth.residual}};
  summary["eps"] = config.eps;
  summary["seed"] = config.seed;
  summary["seeds"] = config.seeds;

  RunReport report = config.mode == RunConfig::Mode::centralized
                         ? execute_centralized(config, problem, truth, sc, summary)
                         : execute_decentralized(config, problem, truth, summary);

  Json checks = Json::array();
  report.all_checks_passed = true;
  for (const CheckResult& c : report.checks) {
    report.all_checks_passed = report.all_checks_passed && c.passed;
    checks.push_back(Json{{"name", c.name},
                          {"passed", c.passed},
                          {"measured", c.measured},
                          {"bound", c.bound}});
  }
  summary["checks"] = std::move(checks);
  summary["all_checks_passed"] = report.all_checks_passed;
  report.summary = std::move(summary);

  if (!config.out_summary.empty())
    save_json_file(config.out_summary, report.summary);
  return report;
}

SweepResult run_sweep(const SweepSpec& spec) {
  SweepResult result;
  std::vector<std::pair<double, double>> grid;
  for (double mx : spec.mu_x_grid)
    for (double my : spec.mu_y_grid) grid.emplace_back(mx, my);

  // one seed for every cell: the coupling and linear terms stay fixed while
  // only the curvature moduli move
  auto run_cell = [&spec](double mu_x, double mu_y,
                          std::uint64_t seed) -> SweepCell {
    SweepCell cell{mu_x, mu_y, 0, false};
    try {
      GeneratorSpec gs;
      gs.n = 1;
      gs.dim_x = spec.dim;
      gs.dim_y = spec.dim;
      gs.mu_x = mu_x;
      gs.L_x = spec.isotropic_blocks ? mu_x : spec.L_x;
      gs.mu_y = mu_y;
      gs.L_y = spec.isotropic_blocks ? mu_y : spec.L_y;
      gs.L_xy = spec.L_xy;
      gs.coupling_span = spec.coupling_span;
      gs.seed = seed;
      const SaddlePointProblem problem = generate_problem(gs);
      const GroundTruth truth = solve_ground_truth(problem);
      const SpectralConstants sc = compute_spectral_constants(
          problem.coupling, problem.range_g_in_A, problem.range_f_in_At);
      const ApdgParameters params = select_parameters(
          solver_constants(problem.constants(), sc), Regime::A);
      OracleConfig oracle;  // exact
      const RunTrace trace =
          run(problem, params, oracle, {spec.max_iters, spec.eps}, truth);
      cell.iterations = trace.records.back().k;
      cell.diverged = !trace.reached_target;
    } catch (const DivergenceError&) {
      cell.diverged = true;
    }
    return cell;
  };

  std::vector<std::future<SweepCell>> futures;
  futures.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    futures.push_back(std::async(std::launch::async, run_cell, grid[i].first,
                                 grid[i].second, spec.seed));
  for (auto& f : futures) result.cells.push_back(f.get());

  std::vector<double> geo, mn, iters;
  std::vector<std::size_t> fit_index(result.cells.size(),
                                     std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const SweepCell& c = result.cells[i];
    if (c.diverged || c.iterations <= 0) continue;
    fit_index[i] = geo.size();
    geo.push_back(1.0 / std::sqrt(c.mu_x * c.mu_y));
    mn.push_back(1.0 / std::min(c.mu_x, c.mu_y));
    iters.push_back(static_cast<double>(c.iterations));
  }
  if (iters.size() >= 2) {
    result.geometric_fit = fit_log_log(geo, iters);
    result.min_fit = fit_log_log(mn, iters);

    result.max_ratio = 1.0;
    for (const SweepCell& c : result.cells)
      result.max_ratio = std::max(
          result.max_ratio, std::max(c.mu_x / c.mu_y, c.mu_y / c.mu_x));
    result.extremes_favor_geometric = true;
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      const SweepCell& c = result.cells[i];
      const double ratio = std::max(c.mu_x / c.mu_y, c.mu_y / c.mu_x);
      if (ratio < result.max_ratio || fit_index[i] == std::numeric_limits<std::size_t>::max())
        continue;
      const double rg = std::abs(result.geometric_fit.residuals[fit_index[i]]);
      const double rm = std::abs(result.min_fit.residuals[fit_index[i]]);
      if (rg >= rm) result.extremes_favor_geometric = false;
    }
  }
  return result;
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "mu_x,mu_y,iterations,diverged\n";
  for (const SweepCell& c : result.cells)
    out << format_double(c.mu_x) << ',' << format_double(c.mu_y) << ','
        << c.iterations << ',' << (c.diverged ? 1 : 0) << '\n';
}

Json sweep_to_json(const SweepResult& result) {
  Json cells = Json::array();
  for (const SweepCell& c : result.cells)
    cells.push_back(Json{{"mu_x", c.mu_x},
                         {"mu_y", c.mu_y},
                         {"iterations", c.iterations},
                         {"diverged", c.diverged}});
  return Json{
      {"cells", std::move(cells)},
      {"geometric_fit", Json{{"slope", result.geometric_fit.slope},
                             {"intercept", result.geometric_fit.intercept},
                             {"r_squared", result.geometric_fit.r_squared}}},
      {"min_fit", Json{{"slope", result.min_fit.slope},
                       {"intercept", result.min_fit.intercept},
                       {"r_squared", result.min_fit.r_squared}}},
      {"max_ratio", result.max_ratio},
      {"extremes_favor_geometric", result.extremes_favor_geometric}};
}

}  // namespace saddle
