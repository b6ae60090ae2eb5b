#ifndef SADDLE_RNG_HPP
#define SADDLE_RNG_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace saddle {

// Tags for named random streams. Every stochastic draw in the library comes
// from a stream addressed by (node, variable, iteration) and derived from one
// master seed, so serial and parallel executions consume identical values.
enum class StreamVar : std::uint64_t {
  f_gradient = 1,
  g_gradient = 2,
  instance = 3,
  schedule = 4,
  probe = 5,
};

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t node,
                       std::uint64_t variable, std::uint64_t iteration);

class NoiseStream {
 public:
  NoiseStream(std::uint64_t master, std::uint64_t node, StreamVar variable,
              std::uint64_t iteration);
  explicit NoiseStream(std::uint64_t raw_seed);

  double normal();
  Eigen::VectorXd normal_vector(int dim);
  double uniform();                  // [0, 1)
  std::uint64_t uniform_index(std::uint64_t bound);  // [0, bound)

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace saddle

#endif
