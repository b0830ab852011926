#include "mvlevy/rng.hpp"

namespace mvlevy {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, StreamId id) : seed_(seed), id_(id) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(id.replica ^ 0x6A09E667F3BCC909ull));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

PhiloxCounter RngStream::block(std::uint64_t index, std::uint32_t lane) const noexcept {
  const PhiloxCounter ctr = {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                             id_.particle, (id_.channel << 24) | (lane & kSequentialLane)};
  return philox4x32_10(ctr, key_);
}

RngStream::result_type RngStream::operator()() noexcept {
  if (buffered_ == 0) {
    buffer_ = block(position_++, kSequentialLane);
    buffered_ = 2;
  }
  const int off = (2 - buffered_) * 2;
  --buffered_;
  return (static_cast<std::uint64_t>(buffer_[off]) << 32) | buffer_[off + 1];
}

double RngStream::uniform() noexcept {
  const std::uint64_t r = (*this)();
  return to_open_unit(static_cast<std::uint32_t>(r >> 32), static_cast<std::uint32_t>(r));
}

}  // namespace mvlevy
