#include "saddle/complexity.hpp"

#include <cmath>
#include <stdexcept>

namespace saddle {

double predict_rate_bound(const SolverConstants& c, Regime r) {
  if (!regime_feasible(c, r))
    throw std::invalid_argument(std::string("rate bound: regime ") +
                                regime_name(r) + " infeasible");
  switch (r) {
    case Regime::A:
      return 4.0 + 4.0 * std::max({std::sqrt(c.L_x / c.mu_x),
                                   std::sqrt(c.L_y / c.mu_y),
                                   c.L_xy / std::sqrt(c.mu_x * c.mu_y)});
    case Regime::B: {
      const double q = c.L_xy / c.mu_xy;
      return 4.0 + 8.0 * std::max({std::sqrt(c.L_x * c.L_y) / c.mu_xy,
                                   q * std::sqrt(c.L_x / c.mu_x), q * q});
    }
    case Regime::C: {
      const double q = c.L_xy / c.mu_yx;
      return 4.0 + 8.0 * std::max({std::sqrt(c.L_x * c.L_y) / c.mu_yx,
                                   q * std::sqrt(c.L_y / c.mu_y), q * q});
    }
    case Regime::D: {
      const double qx = c.L_xy / c.mu_xy;
      const double qy = c.L_xy / c.mu_yx;
      return 2.0 +
             8.0 * std::max({std::sqrt(c.L_x * c.L_y) * c.L_xy /
                                 (c.mu_xy * c.mu_yx),
                             qy * qy, qx * qx});
    }
  }
  throw std::logic_error("rate bound: unknown regime");
}

double predict_lower_bound(const SolverConstants& c, double eps) {
  if (c.mu_x <= 0.0 || c.mu_y <= 0.0)
    throw std::invalid_argument("lower bound: needs mu_x, mu_y > 0");
  return (std::sqrt(c.L_x / c.mu_x) + c.L_xy / std::sqrt(c.mu_x * c.mu_y) +
          std::sqrt(c.L_y / c.mu_y)) *
         std::log(1.0 / eps);
}

DecentralizedCounts predict_decentralized_counts(const InexactnessBudget& b,
                                                 double theta, double kappa) {
  DecentralizedCounts out;
  out.iterations = b.N;
  out.communications = b.N * b.T;
  out.node_oracle_calls.resize(b.r_f.size());
  for (std::size_t i = 0; i < b.r_f.size(); ++i)
    out.node_oracle_calls[i] = b.N * (b.r_f[i] + b.r_g[i]);
  out.kappa = kappa;
  out.rate_factor = 1.0 / (1.0 - theta);
  return out;
}

LogLogFit fit_log_log(const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("log-log fit: need at least two matched points");
  const std::size_t m = x.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw std::invalid_argument("log-log fit: inputs must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  fit.residuals.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += fit.residuals[i] * fit.residuals[i];
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace saddle
