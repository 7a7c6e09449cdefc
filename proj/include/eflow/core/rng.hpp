#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "eflow/core/matrix.hpp"

namespace eflow {

using Engine = std::mt19937_64;

/// Splittable seed source. Each consumer asks for an engine under a purpose
/// label ("init", "noise", "slice", "split", "dloss", ...) and an optional
/// index, so independent parts of a run never share a random stream.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  SeedStream child(std::string_view label, std::uint64_t index = 0) const;
  Engine engine(std::string_view label, std::uint64_t index = 0) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

Matrix standard_normal(Index rows, Index cols, Engine &engine);

}  // namespace eflow
