#include "saddle/rng.hpp"

namespace saddle {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t node,
                       std::uint64_t variable, std::uint64_t iteration) {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  state ^= node + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h = splitmix64(state);
  state ^= variable + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h = splitmix64(state);
  state ^= iteration + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return splitmix64(state);
}

NoiseStream::NoiseStream(std::uint64_t master, std::uint64_t node,
                         StreamVar variable, std::uint64_t iteration)
    : engine_(mix_seed(master, node, static_cast<std::uint64_t>(variable),
                       iteration)) {}

NoiseStream::NoiseStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

double NoiseStream::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

Eigen::VectorXd NoiseStream::normal_vector(int dim) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = dist(engine_);
  return v;
}

double NoiseStream::uniform() {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

std::uint64_t NoiseStream::uniform_index(std::uint64_t bound) {
  std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(engine_);
}

}  // namespace saddle
