#pragma once

#include <cstdint>
#include <random>

namespace cgm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for (master seed, stream path). Streams depend only on
/// their key, never on scheduling, so parallel trials reproduce serial ones.
inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                       std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ splitmix64(a + 0x632be59bd9b4e019ULL));
  s = splitmix64(s ^ splitmix64(b + 0x8cb92ba72f3d8dd7ULL));
  s = splitmix64(s ^ splitmix64(c + 0xd1342543de82ef95ULL));
  return Rng(s);
}

}  // namespace cgm
