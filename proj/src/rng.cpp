#include "misim/rng.hpp"

#include <cmath>

#include "misim/dist.hpp"
#include "misim/errors.hpp"

namespace misim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

inline std::uint64_t splitmix64_next(std::uint64_t& s) noexcept {
  s += kGolden;
  return mix64(s);
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  std::uint64_t s = mix64(master_seed ^ 0x6A09E667F3BCC909ull) ^
                    mix64(stream_id ^ 0xBB67AE8584CAA73Bull);
  for (auto& word : state_) word = splitmix64_next(s);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = kGolden;
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::next_uniform() {
  // 53-bit mantissa, offset to bin centers so 0 and 1 are unreachable
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() { return normal_quantile(next_uniform()); }

double RngStream::next_gamma(double shape) {
  if (!(shape > 0.0)) throw ConfigError("gamma shape must be positive");
  if (shape < 1.0) {
    const double boost = next_gamma(shape + 1.0);
    return boost * std::pow(next_uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = next_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = next_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::next_chisq(double df) {
  if (!(df > 0.0)) throw ConfigError("chisq df must be positive");
  return 2.0 * next_gamma(0.5 * df);
}

}  // namespace misim
