#pragma once

// Counter-based random streams (Philox4x32-10). Every draw is a pure function
// of (seed, stream id, counter), so particles and replicas never share or
// advance a global generator and results do not depend on worker count.

#include <array>
#include <cstdint>
#include <limits>

namespace mvlevy {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Channel tags for the independent noise sources of one particle.
namespace channel {
inline constexpr std::uint32_t slow = 0;        // L
inline constexpr std::uint32_t fast = 1;        // Z
inline constexpr std::uint32_t frozen = 2;      // Z in the frozen equation
inline constexpr std::uint32_t probe = 3;       // coefficient probes
inline constexpr std::uint32_t projection = 4;  // sliced Wasserstein directions
inline constexpr std::uint32_t sampling = 5;    // free-standing sampler tests
}  // namespace channel

struct StreamId {
  std::uint64_t replica = 0;
  std::uint32_t particle = 0;
  std::uint32_t channel = 0;
  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Maps two 32-bit words to a double strictly inside (0, 1) with 53 bits.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) + 0.5) * 0x1.0p-53;
}

class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, StreamId id);

  /// Random block addressed by (index, lane). Pure: does not touch the
  /// sequential position. Lanes below 2^24 - 1 are free for addressing
  /// (the solvers use lane = mode index, index = time step).
  PhiloxCounter block(std::uint64_t index, std::uint32_t lane = 0) const noexcept;

  // Sequential interface (UniformRandomBitGenerator), on a reserved lane.
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;
  /// Uniform on (0, 1).
  double uniform() noexcept;
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t seed() const noexcept { return seed_; }
  const StreamId& id() const noexcept { return id_; }

  static constexpr std::uint32_t kSequentialLane = (1u << 24) - 1;

 private:
  std::uint64_t seed_;
  StreamId id_;
  PhiloxKey key_{};
  std::uint64_t position_ = 0;
  PhiloxCounter buffer_{};
  int buffered_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mvlevy
