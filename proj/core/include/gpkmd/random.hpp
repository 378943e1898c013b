#pragma once

#include <array>
#include <cstdint>

namespace gpkmd {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Output is a pure function of (counter, key), so streams can be split
/// across workers without shared state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Standard normal draws indexed by position: draw(i) depends only on
/// (seed, stream, i). Uses Box-Muller on Philox output.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  double draw(std::uint64_t index) const noexcept;
  /// Uniform in [0, 1), also position-indexed.
  double uniform(std::uint64_t index) const noexcept;

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
};

/// SplitMix64 finalizer; used to derive per-trial seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace gpkmd
