#pragma once

#include <cstdint>
#include <random>

namespace hydrolab {

using Engine = std::mt19937_64;

/// Independent stream for trajectory `index` under `master_seed`. Streams
/// depend only on (master_seed, index), so ensembles can be generated in any
/// order.
Engine make_stream(std::uint64_t master_seed, std::uint64_t index);

/// SplitMix64 finalizer, used to decorrelate seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace hydrolab
