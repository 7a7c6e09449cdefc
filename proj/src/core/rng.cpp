#include "eflow/core/rng.hpp"

namespace eflow {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a(label)) + index);
}

}  // namespace

SeedStream SeedStream::child(std::string_view label, std::uint64_t index) const {
  return SeedStream(derive(seed_, label, index));
}

Engine SeedStream::engine(std::string_view label, std::uint64_t index) const {
  return Engine(derive(seed_, label, index));
}

Matrix standard_normal(Index rows, Index cols, Engine &engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) {
    out.data()[i] = normal(engine);
  }
  return out;
}

}  // namespace eflow
