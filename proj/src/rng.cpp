#include "fibered/rng.hpp"

#include <cmath>
#include <numbers>

namespace fibered {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

namespace {

// 32 random bits to (0, 1), never 0.
double to_open_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(a) << 21) ^ static_cast<std::uint64_t>(b >> 11);
  return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
}

}  // namespace

NoiseDraw draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  const auto r = philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                             static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
                            {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  NoiseDraw d;
  d.uniform[0] = to_open_unit(r[0], r[1]);
  d.uniform[1] = to_open_unit(r[2], r[3]);
  const double rad = std::sqrt(-2.0 * std::log(d.uniform[0]));
  const double ang = 2.0 * std::numbers::pi * d.uniform[1];
  d.normal[0] = rad * std::cos(ang);
  d.normal[1] = rad * std::sin(ang);
  return d;
}

}  // namespace fibered
