#ifndef SADDLE_HARNESS_HPP
#define SADDLE_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "saddle/complexity.hpp"
#include "saddle/serialization.hpp"
#include "saddle/trace.hpp"

namespace saddle {

struct RunConfig {
  enum class Mode { centralized, decentralized };
  Mode mode = Mode::centralized;
  std::string problem_path;                  // or inline generator
  std::optional<GeneratorSpec> generator;
  std::string schedule_path;                 // decentralized only
  int tau = 1;
  int certify_trials = 200;
  double eps = 1e-3;
  std::optional<Regime> regime;              // nullopt = auto
  std::uint64_t seed = 1;
  int seeds = 1;
  long max_iters = 200000;
  std::string out_trace;
  std::string out_summary;
  TraceFormat format = TraceFormat::csv;
  std::vector<std::string> checks;
};

RunConfig run_config_from_json(const Json& j);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double bound = 0.0;
};

struct RunReport {
  bool all_checks_passed = true;
  std::vector<CheckResult> checks;
  Json summary;
};

// Executes the configured run(s), writes trace and summary files, and
// evaluates the configured invariant checks.
RunReport execute_run(const RunConfig& config);

struct SweepSpec {
  std::vector<double> mu_x_grid;
  std::vector<double> mu_y_grid;
  // Isotropic blocks (L = mu per cell) and a coupling whose singular values
  // reach down to L_xy/coupling_span keep the dominant coupling term in
  // charge of the rate, which is what the scaling experiment measures.
  bool isotropic_blocks = true;
  double L_x = 1.0, L_y = 1.0;  // used when isotropic_blocks is false
  double L_xy = 10.0;
  double coupling_span = 1e3;
  int dim = 10;
  double eps = 1e-10;
  long max_iters = 2000000;
  std::uint64_t seed = 0;
};

struct SweepCell {
  double mu_x = 0.0, mu_y = 0.0;
  long iterations = 0;
  bool diverged = false;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  LogLogFit geometric_fit;  // iterations against 1/sqrt(mu_x mu_y)
  LogLogFit min_fit;        // iterations against 1/min(mu_x, mu_y)
  // |residual| of the geometric model < |residual| of the min model at every
  // off-diagonal cell of maximal mu ratio.
  bool extremes_favor_geometric = false;
  double max_ratio = 1.0;
};

// Iterations-to-eps over the (mu_x, mu_y) grid with exact oracles; cells run
// concurrently. A divergent cell is recorded as such and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

void write_sweep_csv(const std::string& path, const SweepResult& result);
Json sweep_to_json(const SweepResult& result);

}  // namespace saddle

#endif
