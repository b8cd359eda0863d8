#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace hbm {

using Rng = std::mt19937_64;

// Uniform on [0, 1), 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(double p, Rng& rng) { return uniform01(rng) < p; }

// Index drawn proportionally to non-negative weights.
std::size_t sample_categorical(std::span<const double> weights, Rng& rng);
// Same, from unnormalized log weights.
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng);

// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
double sample_log_gamma(double shape, Rng& rng);
double sample_beta(double a, double b, Rng& rng);

}  // namespace hbm
