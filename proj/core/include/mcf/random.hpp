// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "mcf/linalg.hpp"

namespace mcf {

/// Philox4x32-10 block function (Salmon et al., SC'11): maps a 128-bit
/// counter and a 64-bit key to 128 pseudorandom bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream. The seed is the Philox key; the stream id
/// occupies the upper half of the counter, so any (seed, stream) pair gives
/// an independent sequence without coordination between workers.
///
/// Draw order is fully determined by (seed, stream) and the number of draws
/// already taken. The object itself is the caller-owned mutable state.
class RngState {
 public:
  RngState(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Fresh stream derived from (seed, stream, id); does not advance *this.
  RngState substream(std::uint64_t id) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_positive() noexcept;
  /// Standard normal via Box-Muller; pairs are cached.
  double normal() noexcept;
  /// Poisson(rate) draw; inversion below rate 10, PTRS above.
  std::int64_t poisson(double rate) noexcept;
  /// Exponential(rate) draw.
  double exponential(double rate) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  std::optional<double> cached_normal_;
};

/// Precomputed sampler for N(mean, covariance). Identity covariance draws
/// per-coordinate standard normals; a zero covariance returns mean exactly.
class GaussianSampler {
 public:
  GaussianSampler(Vector mean, const SymmetricMatrix& covariance);

  Vector operator()(RngState& rng) const;
  std::size_t dim() const noexcept { return mean_.dim(); }

 private:
  enum class Kind { kZero, kIdentity, kCholesky };
  Vector mean_;
  Kind kind_;
  Matrix factor_;
};

/// One draw from N(mean, covariance). Covariance must be SPD or exactly zero.
Vector gaussian_sample(RngState& rng, const Vector& mean, const SymmetricMatrix& covariance);

}  // namespace mcf
