#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace coinflow {

// xoshiro256** 1.0 (Blackman & Vigna), seeded through splitmix64.
// jump() advances the stream by 2^128 draws; replica i of a run uses the
// base seed jumped i times.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view algorithm_name =
      "xoshiro256** (splitmix64 seeding, 2^128 jump per replica)";

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Exactly uniform on [0, bound) (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  void jump() noexcept;

  // Stream for replica `index` of a run seeded with `seed`.
  static Xoshiro256 for_replica(std::uint64_t seed, std::uint64_t index) noexcept;

  const std::array<std::uint64_t, 4>& state() const noexcept { return state_; }

  friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace coinflow
