#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace qpm {

/// 64-bit finalizer used for seed mixing (splitmix64 step).
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a hash of a stage label.
std::uint64_t hash_label(std::string_view label);

/// Child seed for (master seed, stage label, item index). Fixed mixing
/// function so per-pixel / per-angle simulations are order-independent.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::uint64_t index);

/// Deterministic random stream (xoshiro256** seeded via splitmix64).
/// All samplers are hand-rolled so output is identical across platforms
/// and standard-library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01();

  /// Uniform double in (0, 1].
  double uniform01_open_low();

  /// Zero-mean Gaussian via Box-Muller; second draw is cached.
  double gaussian(double sigma);

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  bool bernoulli(double p);

  /// Number of failures before first success, P(k) = (1-q) q^k, q in [0,1).
  /// With q = nbar/(1+nbar) this is the Bose-Einstein (thermal) photon
  /// number distribution P(k) = nbar^k / (1+nbar)^(k+1).
  std::uint64_t geometric0(double q);

  std::uint64_t bose_einstein(double nbar);

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_gauss_ = 0.0;
  bool has_cached_gauss_ = false;
};

}  // namespace qpm
