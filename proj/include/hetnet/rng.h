#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hetnet {

using Rng = std::mt19937_64;

// Seeds an independent stream for a named consumer. Adding or removing a
// consumer never shifts the draws seen by the others.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::string_view name,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  auto mix = [](std::uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master_seed ^ h) + index);
}

inline Rng make_stream(std::uint64_t master_seed, std::string_view name,
                       std::uint64_t index = 0) {
  return Rng(stream_seed(master_seed, name, index));
}

}  // namespace hetnet
