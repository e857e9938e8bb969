#include "scenecraft/rng.hpp"

namespace scenecraft {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng derive_stream(std::uint64_t seed, std::uint64_t index, std::string_view name) {
  const std::uint64_t mixed = splitmix64(splitmix64(seed) ^ splitmix64(index + 0x51ed270b27a1f3d9ULL) ^ fnv1a64(name));
  return Rng(mixed);
}

}  // namespace scenecraft
