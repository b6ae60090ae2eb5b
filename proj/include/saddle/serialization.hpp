#ifndef SADDLE_SERIALIZATION_HPP
#define SADDLE_SERIALIZATION_HPP

#include <string>

#include <json.hpp>

#include "saddle/network.hpp"
#include "saddle/problem.hpp"

namespace saddle {

using Json = nlohmann::ordered_json;

// Matrices serialize as nested arrays, row-major; all constants explicit.
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

Json problem_to_json(const SaddlePointProblem& p);
SaddlePointProblem problem_from_json(const Json& j);

// Schedule description: node count, generator, edge lists per epoch, and
// generator parameters for the seeded random variant.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::static_graph;
  int n = 0;
  std::vector<Graph> epochs;
  double extra_edge_prob = 0.0;
  std::uint64_t seed = 0;
};

Json schedule_spec_to_json(const ScheduleSpec& s);
ScheduleSpec schedule_spec_from_json(const Json& j);
MixingSchedule build_schedule(const ScheduleSpec& s);

// Throws std::runtime_error naming the path on open/parse failure.
Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

void save_problem(const std::string& path, const SaddlePointProblem& p);
SaddlePointProblem load_problem(const std::string& path);
void save_schedule_spec(const std::string& path, const ScheduleSpec& s);
ScheduleSpec load_schedule_spec(const std::string& path);

}  // namespace saddle

#endif
