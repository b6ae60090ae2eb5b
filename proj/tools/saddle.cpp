#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "saddle/harness.hpp"

namespace {

using saddle::Json;

int cmd_generate(const saddle::GeneratorSpec& spec, const std::string& out) {
  const saddle::SaddlePointProblem problem = saddle::generate_problem(spec);
  saddle::save_problem(out, problem);

  // Realized constants from the actual spectra, for auditing the targets.
  double lmin_x = 1e300, lmax_x = 0, lmin_y = 1e300, lmax_y = 0;
  for (const auto& fi : problem.f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fi.curvature,
                                                      Eigen::EigenvaluesOnly);
    lmin_x = std::min(lmin_x, es.eigenvalues().minCoeff());
    lmax_x = std::max(lmax_x, es.eigenvalues().maxCoeff());
  }
  for (const auto& gi : problem.g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gi.curvature,
                                                      Eigen::EigenvaluesOnly);
    lmin_y = std::min(lmin_y, es.eigenvalues().minCoeff());
    lmax_y = std::max(lmax_y, es.eigenvalues().maxCoeff());
  }
  const saddle::ProblemConstants pc = problem.constants();
  const saddle::SpectralConstants sc = saddle::compute_spectral_constants(
      problem.coupling, problem.range_g_in_A, problem.range_f_in_At);
  Json realized{{"file", out},
                {"L_x", pc.L_x},
                {"mu_x", pc.mu_x},
                {"L_y", pc.L_y},
                {"mu_y", pc.mu_y},
                {"L_lx", pc.L_lx},
                {"mu_lx", pc.mu_lx},
                {"L_ly", pc.L_ly},
                {"mu_ly", pc.mu_ly},
                {"L_xy", sc.L_xy},
                {"mu_xy", sc.mu_xy},
                {"mu_yx", sc.mu_yx},
                {"spectrum_x", Json{{"min", lmin_x}, {"max", lmax_x}}},
                {"spectrum_y", Json{{"min", lmin_y}, {"max", lmax_y}}}};
  std::cout << realized.dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, std::uint64_t seed_override,
            bool has_seed, int seeds_override, bool has_seeds,
            const std::string& out_trace, const std::string& out_summary,
            const std::string& format) {
  saddle::RunConfig config =
      saddle::run_config_from_json(saddle::load_json_file(config_path));
  if (has_seed) config.seed = seed_override;
  if (has_seeds) config.seeds = seeds_override;
  if (!out_trace.empty()) config.out_trace = out_trace;
  if (!out_summary.empty()) config.out_summary = out_summary;
  if (!format.empty())
    config.format = format == "structured" ? saddle::TraceFormat::structured
                                           : saddle::TraceFormat::csv;
  const saddle::RunReport report = saddle::execute_run(config);
  std::cout << report.summary.dump(2) << "\n";
  return report.all_checks_passed ? 0 : 1;
}

int cmd_sweep(const saddle::SweepSpec& spec, const std::string& out,
              const std::string& out_summary) {
  const saddle::SweepResult result = saddle::run_sweep(spec);
  if (!out.empty()) saddle::write_sweep_csv(out, result);
  const Json summary = saddle::sweep_to_json(result);
  if (!out_summary.empty()) saddle::save_json_file(out_summary, summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_certify(const std::string& schedule_path, int tau, int trials,
                const std::string& out, const std::string& dump_matrices,
                int dump_count) {
  const saddle::ScheduleSpec spec = saddle::load_schedule_spec(schedule_path);
  const saddle::MixingSchedule schedule = saddle::build_schedule(spec);
  const saddle::ContractionCertificate cert =
      saddle::certify_contraction(schedule, tau, trials);
  Json j{{"tau", cert.tau},
         {"lambda", cert.lambda},
         {"raw_lambda", cert.raw_lambda},
         {"spectral", cert.spectral},
         {"trials", cert.trials}};
  if (!dump_matrices.empty()) {
    Json mats = Json::array();
    for (int k = 0; k < dump_count; ++k)
      mats.push_back(saddle::matrix_to_json(schedule.matrix(k)));
    saddle::save_json_file(dump_matrices,
                           Json{{"n", schedule.nodes()}, {"matrices", mats}});
  }
  if (!out.empty()) saddle::save_json_file(out, j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_predict(const std::string& problem_path, const std::string& regime,
                double eps) {
  const saddle::SaddlePointProblem problem = saddle::load_problem(problem_path);
  const saddle::SpectralConstants sc = saddle::compute_spectral_constants(
      problem.coupling, problem.range_g_in_A, problem.range_f_in_At);
  const saddle::SolverConstants c =
      saddle::solver_constants(problem.constants(), sc);

  Json per_regime = Json::object();
  for (saddle::Regime r : {saddle::Regime::A, saddle::Regime::B,
                           saddle::Regime::C, saddle::Regime::D}) {
    if (!saddle::regime_feasible(c, r)) continue;
    const saddle::ApdgParameters p = saddle::select_parameters(c, r);
    per_regime[saddle::regime_name(r)] =
        Json{{"rate_factor", 1.0 / (1.0 - p.theta)},
             {"rate_bound", saddle::predict_rate_bound(c, r)},
             {"theta", p.theta}};
  }
  Json j{{"regimes", std::move(per_regime)}};
  if (c.mu_x > 0.0 && c.mu_y > 0.0)
    j["lower_bound"] = saddle::predict_lower_bound(c, eps);
  if (regime != "auto" && !regime.empty())
    j["requested"] = regime;
  else {
    const saddle::ApdgParameters best = saddle::select_parameters_auto(c);
    j["auto_regime"] = saddle::regime_name(best.regime);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saddle-point solver harness: accelerated primal-dual method "
               "with consensus-based decentralized execution"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random problem file");
  saddle::GeneratorSpec gspec;
  std::string gen_out = "problem.json";
  gen->add_option("--n", gspec.n, "node count");
  gen->add_option("--dim-x", gspec.dim_x, "primal dimension");
  gen->add_option("--dim-y", gspec.dim_y, "dual dimension");
  gen->add_option("--mu-x", gspec.mu_x, "target strong convexity of f");
  gen->add_option("--L-x", gspec.L_x, "target smoothness of f");
  gen->add_option("--mu-y", gspec.mu_y, "target strong convexity of g");
  gen->add_option("--L-y", gspec.L_y, "target smoothness of g");
  gen->add_option("--L-xy", gspec.L_xy, "target top singular value of A");
  gen->add_option("--sigma-f2", gspec.sigma_f2, "per-node gradient variance of f");
  gen->add_option("--sigma-g2", gspec.sigma_g2, "per-node gradient variance of g");
  gen->add_option("--heterogeneity", gspec.heterogeneity,
                  "relative spread of per-node constants, in [0,1)");
  gen->add_option("--seed", gspec.seed, "generator seed");
  gen->add_option("--out", gen_out, "output problem file");

  // run
  auto* runc = app.add_subcommand("run", "Execute a configured experiment");
  std::string run_config, run_trace, run_summary, run_format;
  std::uint64_t run_seed = 0;
  int run_seeds = 0;
  auto* seed_opt = runc->add_option("--seed", run_seed, "master seed override");
  auto* seeds_opt =
      runc->add_option("--seeds", run_seeds, "repetition count override");
  runc->add_option("--config", run_config, "run configuration file")->required();
  runc->add_option("--out", run_trace, "trace output override");
  runc->add_option("--out-summary", run_summary, "summary output override");
  runc->add_option("--format", run_format, "trace format: csv or structured");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Iterations-to-eps over a (mu_x, mu_y) grid");
  saddle::SweepSpec sspec;
  double mu_min = 1e-2, mu_max = 1.0;
  int points = 5;
  std::string sweep_out = "sweep.csv", sweep_summary;
  bool sweep_anisotropic = false;
  sweep->add_option("--mu-min", mu_min, "smallest mu on the grid");
  sweep->add_option("--mu-max", mu_max, "largest mu on the grid");
  sweep->add_option("--points", points, "grid points per axis");
  sweep->add_flag("--anisotropic", sweep_anisotropic,
                  "use fixed L-x/L-y instead of isotropic blocks");
  sweep->add_option("--L-x", sspec.L_x, "smoothness of f (anisotropic mode)");
  sweep->add_option("--L-y", sspec.L_y, "smoothness of g (anisotropic mode)");
  sweep->add_option("--L-xy", sspec.L_xy, "top singular value of A");
  sweep->add_option("--coupling-span", sspec.coupling_span,
                    "sigma_max/sigma_min of the coupling");
  sweep->add_option("--dim", sspec.dim, "dimension per block");
  sweep->add_option("--eps", sspec.eps, "target accuracy");
  sweep->add_option("--max-iters", sspec.max_iters, "per-cell iteration cap");
  sweep->add_option("--seed", sspec.seed, "instance seed");
  sweep->add_option("--out", sweep_out, "grid table output (CSV)");
  sweep->add_option("--out-summary", sweep_summary, "fit summary output (JSON)");

  // certify
  auto* cert = app.add_subcommand("certify", "Certify a schedule's contraction");
  std::string cert_schedule, cert_out, cert_dump;
  int cert_tau = 1, cert_trials = 200, cert_dump_count = 4;
  cert->add_option("--schedule", cert_schedule, "schedule file")->required();
  cert->add_option("--tau", cert_tau, "window length");
  cert->add_option("--trials", cert_trials, "windows to sample");
  cert->add_option("--out", cert_out, "certificate output (JSON)");
  cert->add_option("--dump-matrices", cert_dump,
                   "write the first mixing matrices to this file");
  cert->add_option("--dump-count", cert_dump_count,
                   "how many matrices to dump");

  // predict
  auto* pred = app.add_subcommand("predict", "Evaluate complexity predictors");
  std::string pred_problem, pred_regime = "auto";
  double pred_eps = 1e-3;
  pred->add_option("--problem", pred_problem, "problem file")->required();
  pred->add_option("--regime", pred_regime, "regime: auto, A, B, C or D");
  pred->add_option("--eps", pred_eps, "target accuracy");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gspec, gen_out);
    if (runc->parsed())
      return cmd_run(run_config, run_seed, seed_opt->count() > 0, run_seeds,
                     seeds_opt->count() > 0, run_trace, run_summary,
                     run_format);
    if (sweep->parsed()) {
      if (points < 0) throw std::runtime_error("sweep: negative point count");
      sspec.isotropic_blocks = !sweep_anisotropic;
      for (int i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0
                                     : static_cast<double>(i) /
                                           static_cast<double>(points - 1);
        sspec.mu_x_grid.push_back(
            mu_min * std::pow(mu_max / mu_min, t));
      }
      sspec.mu_y_grid = sspec.mu_x_grid;
      return cmd_sweep(sspec, sweep_out, sweep_summary);
    }
    if (cert->parsed())
      return cmd_certify(cert_schedule, cert_tau, cert_trials, cert_out,
                         cert_dump, cert_dump_count);
    if (pred->parsed()) return cmd_predict(pred_problem, pred_regime, pred_eps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
