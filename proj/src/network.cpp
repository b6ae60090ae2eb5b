#include "saddle/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "saddle/rng.hpp"

namespace saddle {

Graph ring_graph(int n) {
  Graph g{n, {}};
  if (n < 2) return g;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  if (n > 2) g.edges.emplace_back(n - 1, 0);
  return g;
}

Graph path_graph(int n) {
  Graph g{n, {}};
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

Graph complete_graph(int n) {
  Graph g{n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  return g;
}

Graph edgeless_graph(int n) { return Graph{n, {}}; }

Eigen::MatrixXd metropolis_weights(const Graph& graph) {
  const int n = graph.n;
  if (n < 1) throw std::invalid_argument("metropolis weights: empty graph");
  std::vector<int> degree(n, 0);
  for (auto [i, j] : graph.edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw std::invalid_argument("metropolis weights: invalid edge");
    ++degree[i];
    ++degree[j];
  }
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : graph.edges) {
    const double w = 1.0 / (1.0 + std::max(degree[i], degree[j]));
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < n; ++i) W(i, i) = 1.0 - W.row(i).sum();
  return W;
}

MixingSchedule MixingSchedule::static_graph(const Graph& g) {
  MixingSchedule s;
  s.kind_ = ScheduleKind::static_graph;
  s.n_ = g.n;
  s.matrices_.push_back(metropolis_weights(g));
  return s;
}

MixingSchedule MixingSchedule::periodic(const std::vector<Graph>& epochs) {
  if (epochs.empty())
    throw std::invalid_argument("mixing schedule: empty epoch list");
  MixingSchedule s;
  s.kind_ = ScheduleKind::periodic_sequence;
  s.n_ = epochs.front().n;
  for (const Graph& g : epochs) {
    if (g.n != s.n_)
      throw std::invalid_argument("mixing schedule: inconsistent node counts");
    s.matrices_.push_back(metropolis_weights(g));
  }
  return s;
}

MixingSchedule MixingSchedule::random_switching(int n, double extra_edge_prob,
                                                std::uint64_t seed) {
  if (n < 2)
    throw std::invalid_argument("mixing schedule: random switching needs n >= 2");
  if (extra_edge_prob < 0.0 || extra_edge_prob > 1.0)
    throw std::invalid_argument("mixing schedule: edge probability out of range");
  MixingSchedule s;
  s.kind_ = ScheduleKind::random_switching;
  s.n_ = n;
  s.extra_edge_prob_ = extra_edge_prob;
  s.seed_ = seed;
  return s;
}

long MixingSchedule::period() const {
  return kind_ == ScheduleKind::random_switching
             ? 0
             : static_cast<long>(matrices_.size());
}

Eigen::MatrixXd MixingSchedule::matrix(long k) const {
  if (k < 0) throw std::invalid_argument("mixing schedule: negative index");
  switch (kind_) {
    case ScheduleKind::static_graph:
      return matrices_[0];
    case ScheduleKind::periodic_sequence:
      return matrices_[static_cast<std::size_t>(k) % matrices_.size()];
    case ScheduleKind::random_switching: {
      NoiseStream stream(seed_, 0, StreamVar::schedule,
                         static_cast<std::uint64_t>(k));
      Graph g{n_, {}};
      // Random spanning tree over a shuffled node order.
      std::vector<int> order(n_);
      std::iota(order.begin(), order.end(), 0);
      for (int i = n_ - 1; i > 0; --i)
        std::swap(order[i], order[stream.uniform_index(i + 1)]);
      std::vector<std::vector<bool>> used(n_, std::vector<bool>(n_, false));
      for (int i = 1; i < n_; ++i) {
        const int parent = order[stream.uniform_index(i)];
        const int child = order[i];
        g.edges.emplace_back(parent, child);
        used[parent][child] = used[child][parent] = true;
      }
      for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
          if (!used[i][j] && stream.uniform() < extra_edge_prob_)
            g.edges.emplace_back(i, j);
      return metropolis_weights(g);
    }
  }
  throw std::logic_error("mixing schedule: unknown kind");
}

double second_largest_singular_value(const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  const Eigen::MatrixXd M =
      W - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

ContractionCertificate certify_contraction(const MixingSchedule& schedule,
                                           int tau_candidate, int trials,
                                           std::uint64_t seed) {
  if (tau_candidate < 1)
    throw std::invalid_argument("certify: tau must be >= 1");
  if (trials < 1) throw std::invalid_argument("certify: trials must be >= 1");

  ContractionCertificate cert;
  cert.tau = tau_candidate;

  if (schedule.kind() == ScheduleKind::static_graph) {
    const double s2 = second_largest_singular_value(schedule.matrix(0));
    const double ratio = std::pow(s2, tau_candidate);
    if (ratio >= 1.0)
      throw std::runtime_error(
          "certify: schedule rejected, no contraction (ratio >= 1)");
    cert.raw_lambda = 1.0 - ratio;
    cert.lambda = cert.raw_lambda;
    cert.spectral = true;
    cert.trials = 0;
    return cert;
  }

  // Time-varying: bound each sampled tau-step window by the spectral norm of
  // its matrix product over the consensus-orthogonal subspace.
  const long period = schedule.period();
  const long horizon = (period > 0 ? period : 64);
  double worst = 0.0;
  NoiseStream stream(seed, 0, StreamVar::probe, 0);
  int examined = 0;
  for (int t = 0; t < trials; ++t) {
    long start;
    if (period > 0) {
      if (t >= horizon) break;  // windows repeat exactly after one period
      start = t;
    } else {
      start = static_cast<long>(stream.uniform_index(
          static_cast<std::uint64_t>(horizon * 16)));
    }
    Eigen::MatrixXd P =
        Eigen::MatrixXd::Identity(schedule.nodes(), schedule.nodes());
    for (int s = 0; s < tau_candidate; ++s) P = P * schedule.matrix(start + s);
    worst = std::max(worst, second_largest_singular_value(P));
    ++examined;
  }
  if (worst >= 1.0)
    throw std::runtime_error(
        "certify: schedule rejected, no contraction (ratio >= 1)");
  cert.raw_lambda = 1.0 - worst;
  cert.lambda = 0.95 * cert.raw_lambda;
  cert.spectral = false;
  cert.trials = examined;
  return cert;
}

Eigen::MatrixXd consensus(const Eigen::MatrixXd& X,
                          const MixingSchedule& schedule, long start_index,
                          long T) {
  if (T < 0) throw std::invalid_argument("consensus: negative round count");
  if (X.cols() != schedule.nodes())
    throw std::invalid_argument("consensus: column count must equal node count");
  Eigen::MatrixXd Z = X;
  for (long t = 0; t < T; ++t) Z = Z * schedule.matrix(start_index + t);
  return Z;
}

Eigen::MatrixXd chebyshev_consensus(const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& W, int T) {
  if (T < 0) throw std::invalid_argument("chebyshev consensus: negative degree");
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("chebyshev consensus: W must be symmetric");
  if (T == 0) return X;

  const double s2 = second_largest_singular_value(W);
  if (s2 >= 1.0)
    throw std::runtime_error("chebyshev consensus: no spectral gap");
  if (s2 < 1e-14) return X * W;  // one step already averages exactly

  // Z_t = X T_t(W / s2), c_t = T_t(1 / s2); the returned Z_T / c_T equals
  // one at the consensus eigenvalue and stays below 1/c_T on [-s2, s2].
  const double inv = 1.0 / s2;
  Eigen::MatrixXd Z_prev = X;
  Eigen::MatrixXd Z = (X * W) * inv;
  double c_prev = 1.0, c = inv;
  for (int t = 2; t <= T; ++t) {
    Eigen::MatrixXd Z_next = 2.0 * inv * (Z * W) - Z_prev;
    const double c_next = 2.0 * inv * c - c_prev;
    if (!std::isfinite(c_next)) break;  // damping already below precision
    Z_prev = std::move(Z);
    Z = std::move(Z_next);
    c_prev = c;
    c = c_next;
  }
  return Z / c;
}

long consensus_rounds_needed(double D, double delta_prime, int tau,
                             double lambda) {
  if (D <= 0.0 || delta_prime <= 0.0)
    throw std::invalid_argument("consensus rounds: D and delta' must be positive");
  if (tau < 1 || lambda <= 0.0 || lambda > 1.0)
    throw std::invalid_argument("consensus rounds: need tau >= 1, lambda in (0,1]");
  if (D <= delta_prime) return 0;
  const double t = static_cast<double>(tau) / lambda * std::log(D / delta_prime);
  return std::max<long>(0, static_cast<long>(std::ceil(t)));
}

}  // namespace saddle
