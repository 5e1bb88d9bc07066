#pragma once

#include <array>
#include <cstdint>

namespace fibered {

/// Philox4x32-10 counter-based generator: the output is a pure function of
/// (key, counter), so every (seed, particle, step) triple gets its own stream.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Two independent uniforms in (0, 1) and two standard normals for one
/// (seed, stream, step) triple.
struct NoiseDraw {
  double uniform[2];
  double normal[2];
};

NoiseDraw draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t step);

/// Convenience: first normal of the triple.
inline double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  return draw(seed, stream, step).normal[0];
}

}  // namespace fibered
