#pragma once

#include <cstdint>
#include <random>

namespace dflsim {

using Engine = std::mt19937_64;

/// Stream purposes. Values are part of the reproducibility contract: never
/// renumber an existing entry.
enum class Purpose : std::uint64_t {
  model_init = 1,
  partition = 2,
  holdout = 3,
  malicious_selection = 4,
  data_poison = 5,
  model_poison = 6,
  train_shuffle = 7,
  topology = 8,
  explorer = 9,
  root_split = 10,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent 64-bit seed for (purpose, node, round) from the
/// master seed. Pure function of its arguments.
std::uint64_t derive_seed(std::uint64_t master, Purpose purpose,
                          std::uint64_t node = 0, std::uint64_t round = 0);

inline Engine make_engine(std::uint64_t seed) { return Engine{seed}; }

}  // namespace dflsim
