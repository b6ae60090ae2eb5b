#ifndef SADDLE_COMPLEXITY_HPP
#define SADDLE_COMPLEXITY_HPP

#include <vector>

#include "saddle/apdg.hpp"
#include "saddle/decentralized.hpp"

namespace saddle {

// Explicit upper bound on 1/(1-theta) for the regime's parameter choice:
//   A: 4 + 4 max{sqrt(L_x/mu_x), sqrt(L_y/mu_y), L_xy/sqrt(mu_x mu_y)}
//   B: 4 + 8 max{sqrt(L_x L_y)/mu_xy, (L_xy/mu_xy) sqrt(L_x/mu_x), (L_xy/mu_xy)^2}
//   C: 4 + 8 max{sqrt(L_x L_y)/mu_yx, (L_xy/mu_yx) sqrt(L_y/mu_y), (L_xy/mu_yx)^2}
//   D: 2 + 8 max{sqrt(L_x L_y) L_xy/(mu_xy mu_yx), (L_xy/mu_yx)^2, (L_xy/mu_xy)^2}
double predict_rate_bound(const SolverConstants& c, Regime r);

// (sqrt(L_x/mu_x) + L_xy/sqrt(mu_x mu_y) + sqrt(L_y/mu_y)) ln(1/eps),
// the known lower complexity bound for this problem class.
double predict_lower_bound(const SolverConstants& c, double eps);

struct DecentralizedCounts {
  long iterations = 0;      // N
  long communications = 0;  // N * T
  std::vector<long> node_oracle_calls;  // N * (r_{f,i} + r_{g,i})
  double kappa = 0.0;       // tau / lambda of the certified schedule
  double rate_factor = 0.0;  // 1/(1-theta)
};

DecentralizedCounts predict_decentralized_counts(const InexactnessBudget& b,
                                                 double theta, double kappa);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // log y - fitted, per point
};

// Least-squares fit of log y against log x.
LogLogFit fit_log_log(const std::vector<double>& x,
                      const std::vector<double>& y);

}  // namespace saddle

#endif
