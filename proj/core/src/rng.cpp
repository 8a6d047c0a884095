#include "dflsim/rng.hpp"

namespace dflsim {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Purpose purpose, std::uint64_t node,
                          std::uint64_t round) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ (node + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (round + 0x85157AF5ULL));
  return h;
}

}  // namespace dflsim
