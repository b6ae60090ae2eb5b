#ifndef SADDLE_NETWORK_HPP
#define SADDLE_NETWORK_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace saddle {

// Undirected simple graph on n nodes.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

Graph ring_graph(int n);
Graph path_graph(int n);
Graph complete_graph(int n);
Graph edgeless_graph(int n);

// W_ij = 1/(1 + max(deg_i, deg_j)) on edges, diagonal fills rows to one.
// Symmetric and doubly stochastic; zero off-diagonal exactly on non-edges.
Eigen::MatrixXd metropolis_weights(const Graph& graph);

enum class ScheduleKind { static_graph, periodic_sequence, random_switching };

// A (possibly time-varying) sequence of mixing matrices. Matrices are
// generated lazily for the seeded random generator and are immutable once
// the schedule is built.
class MixingSchedule {
 public:
  static MixingSchedule static_graph(const Graph& g);
  static MixingSchedule periodic(const std::vector<Graph>& epochs);
  // Random connected spanning subgraph per epoch: a spanning tree plus each
  // remaining edge independently with probability extra_edge_prob.
  static MixingSchedule random_switching(int n, double extra_edge_prob,
                                         std::uint64_t seed);

  Eigen::MatrixXd matrix(long k) const;
  int nodes() const { return n_; }
  ScheduleKind kind() const { return kind_; }
  // Number of distinct epochs (0 for the aperiodic random generator).
  long period() const;

 private:
  MixingSchedule() = default;
  ScheduleKind kind_ = ScheduleKind::static_graph;
  int n_ = 0;
  std::vector<Eigen::MatrixXd> matrices_;
  double extra_edge_prob_ = 0.0;
  std::uint64_t seed_ = 0;
};

struct ContractionCertificate {
  int tau = 1;
  double lambda = 0.0;      // safety-margined for Monte-Carlo certificates
  double raw_lambda = 0.0;  // before the margin
  bool spectral = false;    // exact spectral certificate (static schedules)
  int trials = 0;           // windows examined by the Monte-Carlo estimate
};

// Static schedules receive the exact certificate lambda = 1 - sigma_2(W)^tau.
// Time-varying schedules are certified by sampling tau-step windows and
// bounding each window's contraction spectrally; the result carries a 5%
// safety margin and is flagged as non-analytic (spectral = false).
// Throws when no contraction is found (ratio >= 1).
ContractionCertificate certify_contraction(const MixingSchedule& schedule,
                                           int tau_candidate, int trials,
                                           std::uint64_t seed = 12345);

// T successive mixing multiplications X <- X W^k starting at start_index.
// Column means are preserved at every step.
Eigen::MatrixXd consensus(const Eigen::MatrixXd& X,
                          const MixingSchedule& schedule, long start_index,
                          long T);

// Degree-T Chebyshev polynomial of a static symmetric W, scaled to damp the
// spectrum on [-sigma_2, sigma_2] while fixing the consensus eigenvalue.
Eigen::MatrixXd chebyshev_consensus(const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& W, int T);

// ceil((tau/lambda) ln(D/delta_prime)) clamped below at zero.
long consensus_rounds_needed(double D, double delta_prime, int tau,
                             double lambda);

// Largest singular value of W - (1/n) 11'; equals the worst contraction
// ratio of one mixing step over the consensus-orthogonal subspace.
double second_largest_singular_value(const Eigen::MatrixXd& W);

}  // namespace saddle

#endif
