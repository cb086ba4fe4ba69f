#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace csmri {

using Rng = std::mt19937_64;

// Named substream of a master seed. Distinct names (or distinct master seeds)
// give independent generators; the mapping is stable across platforms.
Rng substream(std::uint64_t master_seed, std::string_view name);

std::uint64_t fnv1a64(std::string_view text);

}  // namespace csmri
