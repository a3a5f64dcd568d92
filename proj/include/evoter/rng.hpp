#pragma once

#include <cstdint>
#include <random>

namespace evoter {

using Seed = std::uint64_t;

// Stream ids partition the randomness of one replica. Adding a stream never
// perturbs the others.
enum class Stream : std::uint64_t {
  kGraph = 1,
  kOpinions = 2,
  kDynamics = 3,
  kCounterX = 4,
  kCounterXPrime = 5,
  kVertexStream = 6,
  kAme = 7,
  kAmeAux = 8,
};

// SplitMix64 finalizer chained over (seed, replica, stream).
std::uint64_t derive_seed(Seed seed, std::uint64_t replica, std::uint64_t stream);

class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(Seed seed, std::uint64_t replica = 0, std::uint64_t stream = 0)
      : engine_(derive_seed(seed, replica, stream)) {}
  Rng(Seed seed, std::uint64_t replica, Stream stream)
      : Rng(seed, replica, static_cast<std::uint64_t>(stream)) {}

  // Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  // Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  bool coin() { return (engine_() >> 63) != 0; }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(engine_);
  }

  // Failures before the first success, support {0, 1, 2, ...}.
  std::uint64_t geometric(double p) {
    if (p >= 1.0) return 0;
    return std::geometric_distribution<std::uint64_t>(p)(engine_);
  }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace evoter
