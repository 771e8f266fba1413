#pragma once

#include <array>
#include <cstdint>

namespace spike {

// Trial-addressable seed. `stream` isolates trials, so parallel trial loops
// reproduce byte-identically regardless of scheduling.
struct Seed {
  std::uint64_t value = 0;
  std::uint64_t stream = 0;
};

// Philox4x32-10 counter-based generator. Key is the 64-bit seed value; the
// 128-bit counter combines a block index with the stream, so distinct
// (value, stream) pairs give non-overlapping, order-independent sequences.
class Rng {
public:
  // block0 offsets the counter; callers use disjoint block ranges of one
  // (value, stream) pair to draw independent sub-sequences.
  explicit Rng(Seed s, std::uint64_t block0 = 0)
      : key_{static_cast<std::uint32_t>(s.value),
             static_cast<std::uint32_t>(s.value >> 32)},
        stream_(s.stream),
        block_(block0) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on (0, 1]; never returns 0 so log() stays finite.
  double uniform();

  // Standard normal, Box-Muller; the second variate is cached.
  double gaussian();

  // One keyed block permutation. Exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(
      const std::array<std::uint32_t, 4>& ctr,
      const std::array<std::uint32_t, 2>& key);

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace spike
