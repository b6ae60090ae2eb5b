#ifndef SADDLE_TRACE_HPP
#define SADDLE_TRACE_HPP

#include <string>

#include "saddle/apdg.hpp"
#include "saddle/decentralized.hpp"
#include "saddle/serialization.hpp"

namespace saddle {

enum class TraceFormat { csv, structured };

// CSV columns: k,dist_x2,dist_y2,psi,f_samples,g_samples
void write_trace_csv(const std::string& path, const RunTrace& trace);
// CSV columns: k,dist_x2,dist_y2,cons_err_x,cons_err_y,spread_u,spread_w,
//              communications
void write_trace_csv(const std::string& path, const DecentralizedTrace& trace);

Json trace_to_json(const RunTrace& trace);
Json trace_to_json(const DecentralizedTrace& trace);

void write_trace(const std::string& path, const RunTrace& trace,
                 TraceFormat format);
void write_trace(const std::string& path, const DecentralizedTrace& trace,
                 TraceFormat format);

Json params_to_json(const ApdgParameters& p);
Json budget_to_json(const InexactnessBudget& b);

// Shortest-round-trip decimal rendering used by every text emitter, so
// identical runs produce byte-identical files.
std::string format_double(double v);

}  // namespace saddle

#endif
