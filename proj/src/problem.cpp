#include "saddle/problem.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace saddle {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void check_node(const SaddlePointProblem& p, int node) {
  if (node < 0 || node >= p.nodes())
    throw std::invalid_argument("node index out of range");
}

}  // namespace

double StochasticOracleSpec::global_sigma_f2() const {
  return sigma_f2.empty() ? 0.0 : mean_of(sigma_f2);
}

double StochasticOracleSpec::global_sigma_g2() const {
  return sigma_g2.empty() ? 0.0 : mean_of(sigma_g2);
}

ProblemConstants SaddlePointProblem::constants() const {
  ProblemConstants c;
  const int n = nodes();
  c.mu_lx = c.mu_ly = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    c.L_x += f[i].L;
    c.mu_x += f[i].mu;
    c.L_y += g[i].L;
    c.mu_y += g[i].mu;
    c.L_lx = std::max(c.L_lx, f[i].L);
    c.L_ly = std::max(c.L_ly, g[i].L);
    c.mu_lx = std::min(c.mu_lx, f[i].mu);
    c.mu_ly = std::min(c.mu_ly, g[i].mu);
  }
  c.L_x /= n;
  c.mu_x /= n;
  c.L_y /= n;
  c.mu_y /= n;
  return c;
}

QuadraticFunction SaddlePointProblem::averaged_f() const {
  QuadraticFunction avg;
  avg.curvature = Eigen::MatrixXd::Zero(dim_x(), dim_x());
  avg.linear = Eigen::VectorXd::Zero(dim_x());
  for (const auto& fi : f) {
    avg.curvature += fi.curvature;
    avg.linear += fi.linear;
    avg.offset += fi.offset;
    avg.L += fi.L;
    avg.mu += fi.mu;
  }
  const double n = static_cast<double>(nodes());
  avg.curvature /= n;
  avg.linear /= n;
  avg.offset /= n;
  avg.L /= n;
  avg.mu /= n;
  return avg;
}

QuadraticFunction SaddlePointProblem::averaged_g() const {
  QuadraticFunction avg;
  avg.curvature = Eigen::MatrixXd::Zero(dim_y(), dim_y());
  avg.linear = Eigen::VectorXd::Zero(dim_y());
  for (const auto& gi : g) {
    avg.curvature += gi.curvature;
    avg.linear += gi.linear;
    avg.offset += gi.offset;
    avg.L += gi.L;
    avg.mu += gi.mu;
  }
  const double n = static_cast<double>(nodes());
  avg.curvature /= n;
  avg.linear /= n;
  avg.offset /= n;
  avg.L /= n;
  avg.mu /= n;
  return avg;
}

void SaddlePointProblem::validate() const {
  if (f.empty() || f.size() != g.size())
    throw std::invalid_argument("problem: need one (f_i, g_i) pair per node");
  if (coupling.size() == 0)
    throw std::invalid_argument("problem: empty coupling matrix");
  bool some_mu_x = false, some_mu_y = false;
  for (const auto& fi : f) {
    fi.validate();
    if (fi.dim() != dim_x())
      throw std::invalid_argument("problem: f_i dimension mismatch");
    some_mu_x = some_mu_x || fi.mu > 0.0;
  }
  for (const auto& gi : g) {
    gi.validate();
    if (gi.dim() != dim_y())
      throw std::invalid_argument("problem: g_i dimension mismatch");
    some_mu_y = some_mu_y || gi.mu > 0.0;
  }
  if (!some_mu_x || !some_mu_y)
    throw std::invalid_argument(
        "problem: need at least one strongly convex f_i and one strongly "
        "convex g_i");
  if (noise.sigma_f2.size() != f.size() || noise.sigma_g2.size() != g.size())
    throw std::invalid_argument("problem: noise spec size mismatch");
  for (double s : noise.sigma_f2)
    if (s < 0.0) throw std::invalid_argument("problem: negative sigma_f2");
  for (double s : noise.sigma_g2)
    if (s < 0.0) throw std::invalid_argument("problem: negative sigma_g2");
  if (noise.model == NoiseModel::none) {
    for (double s : noise.sigma_f2)
      if (s != 0.0)
        throw std::invalid_argument("problem: nonzero variance without a noise model");
    for (double s : noise.sigma_g2)
      if (s != 0.0)
        throw std::invalid_argument("problem: nonzero variance without a noise model");
  }
}

SpectralConstants compute_spectral_constants(const Eigen::MatrixXd& A,
                                             bool range_g_in_A,
                                             bool range_f_in_At) {
  if (A.size() == 0) throw std::invalid_argument("spectral constants: empty matrix");
  if (!A.allFinite())
    throw std::invalid_argument("spectral constants: non-finite entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_ata(
      A.transpose() * A, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_aat(A * A.transpose(),
                                                        Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev_ata = es_ata.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd ev_aat = es_aat.eigenvalues().cwiseMax(0.0);
  const double lmax = std::max(ev_ata.maxCoeff(), ev_aat.maxCoeff());
  const double cutoff = 1e-10 * lmax;

  auto smallest = [cutoff](const Eigen::VectorXd& ev, bool positive_part) {
    if (!positive_part) return ev.minCoeff();
    double best = 0.0;
    for (int i = 0; i < ev.size(); ++i)
      if (ev[i] > cutoff && (best == 0.0 || ev[i] < best)) best = ev[i];
    return best;  // 0 when no eigenvalue clears the cutoff
  };

  SpectralConstants sc;
  sc.range_g_in_A = range_g_in_A;
  sc.range_f_in_At = range_f_in_At;
  sc.L_xy = std::sqrt(lmax);
  sc.mu_xy = std::sqrt(std::max(0.0, smallest(ev_aat, range_g_in_A)));
  sc.mu_yx = std::sqrt(std::max(0.0, smallest(ev_ata, range_f_in_At)));
  return sc;
}

Eigen::VectorXd exact_gradient_f(const SaddlePointProblem& problem, int node,
                                 const Eigen::VectorXd& x) {
  check_node(problem, node);
  return problem.f[node].gradient(x);
}

Eigen::VectorXd exact_gradient_g(const SaddlePointProblem& problem, int node,
                                 const Eigen::VectorXd& y) {
  check_node(problem, node);
  return problem.g[node].gradient(y);
}

namespace {

Eigen::VectorXd noisy_gradient(const QuadraticFunction& h, double sigma2,
                               NoiseModel model, const Eigen::VectorXd& point,
                               NoiseStream& stream, long batch) {
  if (batch < 1) throw std::invalid_argument("stochastic gradient: batch must be >= 1");
  Eigen::VectorXd grad = h.gradient(point);
  if (model == NoiseModel::none || sigma2 == 0.0) return grad;
  // Isotropic Gaussian with per-sample second moment sigma2; averaging a
  // batch of r samples divides the variance by r.
  const int d = static_cast<int>(point.size());
  const double scale =
      std::sqrt(sigma2 / (static_cast<double>(d) * static_cast<double>(batch)));
  grad += scale * stream.normal_vector(d);
  return grad;
}

}  // namespace

Eigen::VectorXd stochastic_gradient_f(const SaddlePointProblem& problem,
                                      int node, const Eigen::VectorXd& x,
                                      NoiseStream& stream, long batch) {
  check_node(problem, node);
  return noisy_gradient(problem.f[node], problem.noise.sigma_f2[node],
                        problem.noise.model, x, stream, batch);
}

Eigen::VectorXd stochastic_gradient_g(const SaddlePointProblem& problem,
                                      int node, const Eigen::VectorXd& y,
                                      NoiseStream& stream, long batch) {
  check_node(problem, node);
  return noisy_gradient(problem.g[node], problem.noise.sigma_g2[node],
                        problem.noise.model, y, stream, batch);
}

GroundTruth solve_ground_truth(const SaddlePointProblem& problem) {
  const QuadraticFunction fbar = problem.averaged_f();
  const QuadraticFunction gbar = problem.averaged_g();
  const int dx = problem.dim_x();
  const int dy = problem.dim_y();

  Eigen::MatrixXd K(dx + dy, dx + dy);
  K.topLeftCorner(dx, dx) = fbar.curvature;
  K.topRightCorner(dx, dy) = problem.coupling.transpose();
  K.bottomLeftCorner(dy, dx) = problem.coupling;
  K.bottomRightCorner(dy, dy) = -gbar.curvature;

  Eigen::VectorXd rhs(dx + dy);
  rhs.head(dx) = -fbar.linear;
  rhs.tail(dy) = gbar.linear;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible())
    throw std::runtime_error(
        "ground truth: singular stationarity system (instance is not "
        "strongly-convex-strongly-concave)");
  const Eigen::VectorXd sol = lu.solve(rhs);

  GroundTruth t;
  t.x_star = sol.head(dx);
  t.y_star = sol.tail(dy);
  const double rx =
      (fbar.gradient(t.x_star) + problem.coupling.transpose() * t.y_star).norm();
  const double ry = (problem.coupling * t.x_star - gbar.gradient(t.y_star)).norm();
  t.residual = std::max(rx, ry);
  return t;
}

namespace {

ConsensusModel consensus_model(const std::vector<QuadraticFunction>& h,
                               double L_g, double mu_g, double L_l, double mu_l,
                               const Eigen::MatrixXd& Z, double delta_prime) {
  const int n = static_cast<int>(h.size());
  if (Z.cols() != n) throw std::invalid_argument("consensus model: column count must equal node count");
  if (Z.rows() != h.front().dim())
    throw std::invalid_argument("consensus model: row dimension mismatch");
  if (delta_prime < 0.0)
    throw std::invalid_argument("consensus model: negative delta_prime");

  Eigen::MatrixXd Zbar = Z.rowwise().mean().replicate(1, n);
  const double spread2 = (Z - Zbar).squaredNorm();
  const double tol = 1e-12 * (1.0 + Z.squaredNorm());
  if (spread2 > delta_prime + tol)
    throw std::invalid_argument(
        "consensus model: consensus error exceeds delta_prime");

  double total = 0.0;
  Eigen::MatrixXd grads(Z.rows(), n);
  for (int i = 0; i < n; ++i) {
    total += h[i].value(Z.col(i));
    grads.col(i) = h[i].gradient(Z.col(i));
  }

  ConsensusModel m;
  m.gradient = grads.rowwise().mean();
  m.value = (total + grads.cwiseProduct(Zbar - Z).sum() +
             0.5 * (mu_l - 2.0 * L_l * L_l / mu_g) * spread2) /
            static_cast<double>(n);
  m.delta = (L_l * L_l / L_g + 2.0 * L_l * L_l / mu_g + L_l - mu_l) *
            delta_prime / (2.0 * static_cast<double>(n));
  return m;
}

}  // namespace

ConsensusModel consensus_model_of_f(const SaddlePointProblem& problem,
                                    const Eigen::MatrixXd& X,
                                    double delta_prime) {
  const ProblemConstants c = problem.constants();
  return consensus_model(problem.f, c.L_x, c.mu_x, c.L_lx, c.mu_lx, X,
                         delta_prime);
}

ConsensusModel consensus_model_of_g(const SaddlePointProblem& problem,
                                    const Eigen::MatrixXd& Y,
                                    double delta_prime) {
  const ProblemConstants c = problem.constants();
  return consensus_model(problem.g, c.L_y, c.mu_y, c.L_ly, c.mu_ly, Y,
                         delta_prime);
}

namespace {

// Spectrum linspace(mu, L) conjugated by a random rotation; mu == L collapses
// to the exact multiple of the identity.
QuadraticFunction random_quadratic(int dim, double mu, double L,
                                   NoiseStream& stream) {
  QuadraticFunction q;
  q.mu = mu;
  q.L = L;
  q.linear = stream.normal_vector(dim);
  if (mu == L || dim == 1) {
    const double level = (dim == 1) ? 0.5 * (mu + L) : mu;
    q.curvature = level * Eigen::MatrixXd::Identity(dim, dim);
    return q;
  }
  Eigen::VectorXd spectrum(dim);
  for (int i = 0; i < dim; ++i)
    spectrum[i] = mu + (L - mu) * static_cast<double>(i) /
                           static_cast<double>(dim - 1);
  Eigen::MatrixXd G(dim, dim);
  for (int j = 0; j < dim; ++j) G.col(j) = stream.normal_vector(dim);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd P = Q * spectrum.asDiagonal() * Q.transpose();
  q.curvature = 0.5 * (P + P.transpose());
  return q;
}

}  // namespace

SaddlePointProblem generate_problem(const GeneratorSpec& spec) {
  if (spec.n < 1 || spec.dim_x < 1 || spec.dim_y < 1)
    throw std::invalid_argument("generator: need n, dim_x, dim_y >= 1");
  if (spec.mu_x > spec.L_x || spec.mu_y > spec.L_y)
    throw std::invalid_argument("generator: infeasible targets (mu > L)");
  if (spec.mu_x <= 0.0 || spec.mu_y <= 0.0 || spec.L_xy <= 0.0)
    throw std::invalid_argument("generator: constants must be positive");
  if (spec.heterogeneity < 0.0 || spec.heterogeneity >= 1.0)
    throw std::invalid_argument("generator: heterogeneity must lie in [0, 1)");

  NoiseStream stream(spec.seed, 0, StreamVar::instance, 0);

  // Per-node scale factors with mean one keep the global (average) constants
  // on target while spreading the local ones.
  std::vector<double> scale(spec.n, 1.0);
  if (spec.heterogeneity > 0.0 && spec.n > 1) {
    double total = 0.0;
    for (int i = 0; i < spec.n; ++i) {
      scale[i] = 1.0 + spec.heterogeneity * (2.0 * stream.uniform() - 1.0);
      total += scale[i];
    }
    for (double& s : scale) s *= static_cast<double>(spec.n) / total;
  }

  SaddlePointProblem p;
  p.f.reserve(spec.n);
  p.g.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    p.f.push_back(random_quadratic(spec.dim_x, scale[i] * spec.mu_x,
                                   scale[i] * spec.L_x, stream));
    p.g.push_back(random_quadratic(spec.dim_y, scale[i] * spec.mu_y,
                                   scale[i] * spec.L_y, stream));
  }

  if (spec.coupling_span < 1.0)
    throw std::invalid_argument("generator: coupling span must be >= 1");
  const int rank = std::min(spec.dim_x, spec.dim_y);
  Eigen::VectorXd singulars(rank);
  for (int i = 0; i < rank; ++i)
    singulars[i] =
        rank == 1 ? spec.L_xy
                  : spec.L_xy * std::pow(1.0 / spec.coupling_span,
                                         1.0 - static_cast<double>(i) /
                                                   static_cast<double>(rank - 1));
  Eigen::MatrixXd Gu(spec.dim_y, spec.dim_y);
  for (int j = 0; j < spec.dim_y; ++j) Gu.col(j) = stream.normal_vector(spec.dim_y);
  Eigen::MatrixXd Gv(spec.dim_x, spec.dim_x);
  for (int j = 0; j < spec.dim_x; ++j) Gv.col(j) = stream.normal_vector(spec.dim_x);
  Eigen::MatrixXd U =
      Eigen::HouseholderQR<Eigen::MatrixXd>(Gu).householderQ();
  Eigen::MatrixXd V =
      Eigen::HouseholderQR<Eigen::MatrixXd>(Gv).householderQ();
  p.coupling = U.leftCols(rank) * singulars.asDiagonal() *
               V.leftCols(rank).transpose();

  p.noise.sigma_f2.assign(spec.n, spec.sigma_f2);
  p.noise.sigma_g2.assign(spec.n, spec.sigma_g2);
  p.noise.model = (spec.sigma_f2 > 0.0 || spec.sigma_g2 > 0.0)
                      ? NoiseModel::gaussian_isotropic
                      : NoiseModel::none;
  p.validate();
  return p;
}

}  // namespace saddle
