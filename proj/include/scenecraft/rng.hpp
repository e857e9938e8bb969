#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scenecraft {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

// Named stream: the seed depends only on (seed, index, name), so inserting an
// unrelated stream never shifts another one.
Rng derive_stream(std::uint64_t seed, std::uint64_t index, std::string_view name);

}  // namespace scenecraft
