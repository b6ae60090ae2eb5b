#include "saddle/trace.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace saddle {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "k,dist_x2,dist_y2,psi,f_samples,g_samples\n";
  for (const auto& r : trace.records)
    out << r.k << ',' << format_double(r.dist_x2) << ','
        << format_double(r.dist_y2) << ',' << format_double(r.psi) << ','
        << r.f_samples << ',' << r.g_samples << '\n';
}

void write_trace_csv(const std::string& path, const DecentralizedTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "k,dist_x2,dist_y2,cons_err_x,cons_err_y,spread_u,spread_w,"
         "communications\n";
  for (const auto& r : trace.records)
    out << r.k << ',' << format_double(r.dist_x2) << ','
        << format_double(r.dist_y2) << ',' << format_double(r.cons_err_x)
        << ',' << format_double(r.cons_err_y) << ','
        << format_double(r.spread_u) << ',' << format_double(r.spread_w) << ','
        << r.communications << '\n';
}

Json trace_to_json(const RunTrace& trace) {
  Json records = Json::array();
  for (const auto& r : trace.records)
    records.push_back(Json{{"k", r.k},
                           {"dist_x2", r.dist_x2},
                           {"dist_y2", r.dist_y2},
                           {"psi", r.psi},
                           {"f_samples", r.f_samples},
                           {"g_samples", r.g_samples}});
  return Json{{"reached_target", trace.reached_target},
              {"projection_residual_x", trace.projection_residual_x},
              {"projection_residual_y", trace.projection_residual_y},
              {"records", std::move(records)}};
}

Json trace_to_json(const DecentralizedTrace& trace) {
  Json records = Json::array();
  for (const auto& r : trace.records)
    records.push_back(Json{{"k", r.k},
                           {"dist_x2", r.dist_x2},
                           {"dist_y2", r.dist_y2},
                           {"cons_err_x", r.cons_err_x},
                           {"cons_err_y", r.cons_err_y},
                           {"spread_u", r.spread_u},
                           {"spread_w", r.spread_w},
                           {"communications", r.communications}});
  return Json{{"communications", trace.communications},
              {"oracle_samples_f", trace.oracle_samples_f},
              {"oracle_samples_g", trace.oracle_samples_g},
              {"final_max_dist", trace.final_max_dist},
              {"budget", budget_to_json(trace.budget)},
              {"params", params_to_json(trace.params)},
              {"records", std::move(records)}};
}

void write_trace(const std::string& path, const RunTrace& trace,
                 TraceFormat format) {
  if (format == TraceFormat::csv)
    write_trace_csv(path, trace);
  else
    save_json_file(path, trace_to_json(trace));
}

void write_trace(const std::string& path, const DecentralizedTrace& trace,
                 TraceFormat format) {
  if (format == TraceFormat::csv)
    write_trace_csv(path, trace);
  else
    save_json_file(path, trace_to_json(trace));
}

Json params_to_json(const ApdgParameters& p) {
  return Json{{"regime", regime_name(p.regime)},
              {"theta", p.theta},
              {"rho", p.rho},
              {"omega", p.omega},
              {"eta_x", p.eta_x},
              {"eta_y", p.eta_y},
              {"alpha_x", p.alpha_x},
              {"alpha_y", p.alpha_y},
              {"beta_x", p.beta_x},
              {"beta_y", p.beta_y},
              {"tau_x", p.tau_x},
              {"tau_y", p.tau_y},
              {"sigma_x", p.sigma_x},
              {"sigma_y", p.sigma_y}};
}

Json budget_to_json(const InexactnessBudget& b) {
  return Json{{"eps", b.eps},
              {"psi0", b.psi0},
              {"nu", b.nu},
              {"E", b.E},
              {"delta_prime", b.delta_prime},
              {"delta_x", b.delta_x},
              {"delta_y", b.delta_y},
              {"F_x", b.F_x},
              {"F_y", b.F_y},
              {"sigma_Fr2", b.sigma_Fr2},
              {"sigma_Gr2", b.sigma_Gr2},
              {"Sigma2", b.Sigma2},
              {"M_x", b.M_x},
              {"M_y", b.M_y},
              {"D_x1", b.D_x1},
              {"D_x2", b.D_x2},
              {"D_y1", b.D_y1},
              {"D_y2", b.D_y2},
              {"D", b.D},
              {"T", b.T},
              {"N", b.N},
              {"r_f", b.r_f},
              {"r_g", b.r_g},
              {"L_x_hat", b.L_x_hat},
              {"L_y_hat", b.L_y_hat},
              {"mu_x_hat", b.mu_x_hat},
              {"mu_y_hat", b.mu_y_hat},
              {"grad_norm_f_star", b.grad_norm_f_star},
              {"grad_norm_g_star", b.grad_norm_g_star}};
}

}  // namespace saddle
