#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ergogof {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// One block = four 32-bit outputs for a 128-bit counter under a 64-bit key.
class Philox4x32 {
 public:
  using counter_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static counter_type block(counter_type ctr, key_type key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Reproducible random stream addressed by (master seed, stream index, substream).
/// Distinct addresses never share counter values. Satisfies
/// UniformRandomBitGenerator, so it plugs into the standard and Boost distributions.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream, std::uint32_t substream = 0)
      : seed_(master_seed), stream_(stream), substream_(substream) {
    key_ = {static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)() >> 5;
    const std::uint64_t lo = (*this)() >> 6;
    return (static_cast<double>(hi * 67108864u + lo) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint32_t substream() const { return substream_; }

 private:
  void refill() {
    // counter: block index (48 bits) | substream (16 bits) | stream (64 bits)
    const Philox4x32::counter_type ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>((block_ >> 32) & 0xFFFFu) | (substream_ << 16),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key_);
    ++block_;
    pos_ = 0;
  }

  std::uint64_t seed_, stream_;
  std::uint32_t substream_;
  Philox4x32::key_type key_{};
  std::uint64_t block_ = 0;
  Philox4x32::counter_type buffer_{};
  int pos_ = 4;
};

}  // namespace ergogof
