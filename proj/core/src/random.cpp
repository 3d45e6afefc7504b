// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/random.hpp"

#include <cmath>
#include <numbers>

#include "mcf/errors.hpp"

namespace mcf {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngState::RngState(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

RngState RngState::substream(std::uint64_t id) const noexcept {
  return RngState(seed_, splitmix64(stream_ ^ splitmix64(id + 0x632be59bd9b4e019ull)));
}

void RngState::refill() noexcept {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                            static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = philox4x32_10(ctr, key);
  ++block_;
  used_ = 0;
}

std::uint64_t RngState::next_u64() noexcept {
  if (used_ > 2) refill();
  const std::uint64_t lo = buffer_[used_];
  const std::uint64_t hi = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double RngState::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::uniform_positive() noexcept {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngState::normal() noexcept {
  if (cached_normal_) {
    const double z = *cached_normal_;
    cached_normal_.reset();
    return z;
  }
  const double u1 = uniform_positive();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(angle);
  return r * std::cos(angle);
}

std::int64_t RngState::poisson(double rate) noexcept {
  if (rate <= 0.0) return 0;
  if (rate < 10.0) {
    const double limit = std::exp(-rate);
    double prod = uniform_positive();
    std::int64_t k = 0;
    while (prod > limit) {
      prod *= uniform_positive();
      ++k;
    }
    return k;
  }
  // Transformed rejection with squeeze (Hormann 1993).
  const double slam = std::sqrt(rate);
  const double loglam = std::log(rate);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform_positive();
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + rate + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -rate + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
      return k;
    }
  }
}

double RngState::exponential(double rate) noexcept { return -std::log(uniform_positive()) / rate; }

// ---------------------------------------------------------------------------

GaussianSampler::GaussianSampler(Vector mean, const SymmetricMatrix& covariance) : mean_(std::move(mean)) {
  if (covariance.dim() != mean_.dim()) {
    throw ValidationError("gaussian_sample: covariance dimension does not match mean");
  }
  if (covariance.is_zero()) {
    kind_ = Kind::kZero;
  } else if (covariance.is_identity()) {
    kind_ = Kind::kIdentity;
  } else {
    try {
      factor_ = cholesky(covariance);
    } catch (const ValidationError&) {
      throw ValidationError("gaussian_sample: covariance is indefinite");
    }
    kind_ = Kind::kCholesky;
  }
}

Vector GaussianSampler::operator()(RngState& rng) const {
  Vector x = mean_;
  switch (kind_) {
    case Kind::kZero:
      break;
    case Kind::kIdentity:
      for (std::size_t i = 0; i < x.dim(); ++i) x[i] += rng.normal();
      break;
    case Kind::kCholesky: {
      Vector z(x.dim());
      for (std::size_t i = 0; i < z.dim(); ++i) z[i] = rng.normal();
      for (std::size_t i = 0; i < x.dim(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += factor_(i, k) * z[k];
        x[i] += s;
      }
      break;
    }
  }
  return x;
}

Vector gaussian_sample(RngState& rng, const Vector& mean, const SymmetricMatrix& covariance) {
  return GaussianSampler(mean, covariance)(rng);
}

}  // namespace mcf
