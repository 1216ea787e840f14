#include "hydrolab/rng.hpp"

namespace hydrolab {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine make_stream(std::uint64_t master_seed, std::uint64_t index) {
  const std::uint64_t a = mix_seed(master_seed);
  const std::uint64_t b = mix_seed(a ^ mix_seed(index + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

}  // namespace hydrolab
