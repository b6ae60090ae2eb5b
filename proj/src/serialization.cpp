#include "saddle/serialization.hpp"

#include <fstream>
#include <stdexcept>

namespace saddle {

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error("matrix: expected nested arrays");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw std::runtime_error("matrix: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::runtime_error("vector: expected array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

namespace {

Json quadratic_to_json(const QuadraticFunction& q) {
  return Json{{"curvature", matrix_to_json(q.curvature)},
              {"linear", vector_to_json(q.linear)},
              {"offset", q.offset},
              {"mu", q.mu},
              {"L", q.L}};
}

QuadraticFunction quadratic_from_json(const Json& j) {
  QuadraticFunction q;
  q.curvature = matrix_from_json(j.at("curvature"));
  q.linear = vector_from_json(j.at("linear"));
  q.offset = j.at("offset").get<double>();
  q.mu = j.at("mu").get<double>();
  q.L = j.at("L").get<double>();
  return q;
}

}  // namespace

Json problem_to_json(const SaddlePointProblem& p) {
  Json nodes = Json::array();
  for (int i = 0; i < p.nodes(); ++i) {
    nodes.push_back(Json{{"f", quadratic_to_json(p.f[i])},
                         {"g", quadratic_to_json(p.g[i])},
                         {"sigma_f2", p.noise.sigma_f2[i]},
                         {"sigma_g2", p.noise.sigma_g2[i]}});
  }
  return Json{
      {"format", "saddle-problem-v1"},
      {"n", p.nodes()},
      {"dim_x", p.dim_x()},
      {"dim_y", p.dim_y()},
      {"noise_model",
       p.noise.model == NoiseModel::gaussian_isotropic ? "gaussian_isotropic"
                                                       : "none"},
      {"range_g_in_A", p.range_g_in_A},
      {"range_f_in_At", p.range_f_in_At},
      {"coupling", matrix_to_json(p.coupling)},
      {"nodes", std::move(nodes)}};
}

SaddlePointProblem problem_from_json(const Json& j) {
  SaddlePointProblem p;
  p.coupling = matrix_from_json(j.at("coupling"));
  const std::string model = j.at("noise_model").get<std::string>();
  if (model == "gaussian_isotropic")
    p.noise.model = NoiseModel::gaussian_isotropic;
  else if (model == "none")
    p.noise.model = NoiseModel::none;
  else
    throw std::runtime_error("problem: unknown noise model '" + model + "'");
  p.range_g_in_A = j.at("range_g_in_A").get<bool>();
  p.range_f_in_At = j.at("range_f_in_At").get<bool>();
  for (const Json& node : j.at("nodes")) {
    p.f.push_back(quadratic_from_json(node.at("f")));
    p.g.push_back(quadratic_from_json(node.at("g")));
    p.noise.sigma_f2.push_back(node.at("sigma_f2").get<double>());
    p.noise.sigma_g2.push_back(node.at("sigma_g2").get<double>());
  }
  p.validate();
  return p;
}

namespace {

Json edges_to_json(const Graph& g) {
  Json edges = Json::array();
  for (auto [a, b] : g.edges) edges.push_back(Json::array({a, b}));
  return edges;
}

Graph graph_from_json(int n, const Json& edges) {
  Graph g{n, {}};
  for (const Json& e : edges)
    g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

}  // namespace

Json schedule_spec_to_json(const ScheduleSpec& s) {
  Json j{{"format", "saddle-schedule-v1"}, {"n", s.n}};
  switch (s.kind) {
    case ScheduleKind::static_graph:
      j["generator"] = "static_graph";
      j["epochs"] = Json::array({edges_to_json(s.epochs.at(0))});
      break;
    case ScheduleKind::periodic_sequence: {
      j["generator"] = "periodic_sequence";
      Json epochs = Json::array();
      for (const Graph& g : s.epochs) epochs.push_back(edges_to_json(g));
      j["epochs"] = std::move(epochs);
      break;
    }
    case ScheduleKind::random_switching:
      j["generator"] = "random_switching";
      j["extra_edge_prob"] = s.extra_edge_prob;
      j["seed"] = s.seed;
      break;
  }
  return j;
}

ScheduleSpec schedule_spec_from_json(const Json& j) {
  ScheduleSpec s;
  s.n = j.at("n").get<int>();
  const std::string gen = j.at("generator").get<std::string>();
  if (gen == "static_graph") {
    s.kind = ScheduleKind::static_graph;
    s.epochs.push_back(graph_from_json(s.n, j.at("epochs").at(0)));
  } else if (gen == "periodic_sequence") {
    s.kind = ScheduleKind::periodic_sequence;
    for (const Json& e : j.at("epochs"))
      s.epochs.push_back(graph_from_json(s.n, e));
  } else if (gen == "random_switching") {
    s.kind = ScheduleKind::random_switching;
    s.extra_edge_prob = j.at("extra_edge_prob").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
  } else {
    throw std::runtime_error("schedule: unknown generator '" + gen + "'");
  }
  return s;
}

MixingSchedule build_schedule(const ScheduleSpec& s) {
  switch (s.kind) {
    case ScheduleKind::static_graph:
      return MixingSchedule::static_graph(s.epochs.at(0));
    case ScheduleKind::periodic_sequence:
      return MixingSchedule::periodic(s.epochs);
    case ScheduleKind::random_switching:
      return MixingSchedule::random_switching(s.n, s.extra_edge_prob, s.seed);
  }
  throw std::logic_error("schedule: unknown kind");
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

void save_problem(const std::string& path, const SaddlePointProblem& p) {
  save_json_file(path, problem_to_json(p));
}

SaddlePointProblem load_problem(const std::string& path) {
  return problem_from_json(load_json_file(path));
}

void save_schedule_spec(const std::string& path, const ScheduleSpec& s) {
  save_json_file(path, schedule_spec_to_json(s));
}

ScheduleSpec load_schedule_spec(const std::string& path) {
  return schedule_spec_from_json(load_json_file(path));
}

}  // namespace saddle
