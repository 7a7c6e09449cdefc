#pragma once

#include <cstdint>
#include <string>

#include "eflow/data/dataset.hpp"

namespace eflow::data {

enum class SynthKind { two_moons, gauss_ring, checkerboard };

struct SynthSpec {
  SynthKind kind = SynthKind::two_moons;
  /// Number of ring components; gauss_ring only.
  int components = 8;
};

/// Accepts "two_moons", "checkerboard", "gauss_ring" (8 components) and
/// "gauss_ring(k)" / "gauss_ring:k".
SynthSpec parse_synth(const std::string &name);
std::string to_string(const SynthSpec &spec);

/// Two-dimensional toy data.
///   two_moons: interleaved half circles, Gaussian noise 0.1.
///   gauss_ring(k): k Gaussians with std 0.2 spaced on a circle of radius 4,
///     the first centred at (4, 0).
///   checkerboard: uniform on the dark squares of a 4x4 board over [-4, 4]^2.
Dataset synth(const SynthSpec &spec, Index n, std::uint64_t seed);

/// Lifts data into d_out dimensions through a random map with orthonormal
/// columns, then adds isotropic Gaussian noise of the given std.
Dataset embed(const Dataset &ds, Index d_out, double noise, std::uint64_t seed);

}  // namespace eflow::data
