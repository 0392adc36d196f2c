#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace l1lb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a construction hypothesis (n >= 30, p >= 3n, ...) is violated.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the homotopy cannot continue (singular step, non-finite step length).
class DegeneratePathError : public std::runtime_error {
 public:
  DegeneratePathError(std::size_t step, const std::string& what)
      : std::runtime_error("degenerate path at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-trial stream seed derived from (master seed, cell index, trial index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t trial) {
  return mix64(mix64(mix64(master) ^ cell) ^ (trial * 0xd1b54a32d192ed03ULL));
}

/// Standard normal source. Wraps the engine so every consumer draws in the same order.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_); }
  Rng& engine() { return engine_; }

 private:
  Rng engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace l1lb
