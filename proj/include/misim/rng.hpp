#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace misim {

/// Deterministic pseudo-random stream keyed by (master_seed, stream_id).
///
/// xoshiro256++ with splitmix64 state expansion. The same key yields an
/// identical draw sequence on every run and platform; distinct stream ids
/// give streams with no shared state, so replicates and sub-tasks can run
/// concurrently as long as each owns its stream.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform draw strictly inside (0, 1).
  double next_uniform();

  /// Standard normal via the inverse cdf (one uniform per draw).
  double next_normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze, shape > 0.
  double next_gamma(double shape);

  /// Chi-squared with df > 0 degrees of freedom.
  double next_chisq(double df);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
};

/// Stateless 64-bit avalanche mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t z) noexcept;

/// FNV-1a over a byte string; building block for stream-id derivation.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ull) noexcept;

}  // namespace misim
