#include "hbm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hbm/errors.hpp"

namespace hbm {

std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw ArgumentError("sample_categorical: negative or NaN weight");
    total += w;
  }
  if (!(total > 0)) throw ArgumentError("sample_categorical: weights sum to zero");
  double u = uniform01(rng) * total;
  std::size_t last = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0) continue;
    last = k;
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  return last;
}

std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : log_weights) mx = std::max(mx, x);
  if (!std::isfinite(mx)) throw ArgumentError("sample_log_categorical: no finite weight");
  std::vector<double> w(log_weights.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_weights[k] - mx);
  return sample_categorical(w, rng);
}

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0)) throw ArgumentError("sample_log_gamma: shape must be > 0");
  if (shape < 1) {
    // G(a) = G(a+1) * U^(1/a)
    double u = uniform01(rng);
    while (u == 0) u = uniform01(rng);
    return sample_log_gamma(shape + 1, rng) + std::log(u) / shape;
  }
  std::gamma_distribution<double> g(shape, 1.0);
  double x = g(rng);
  while (x <= 0) x = g(rng);
  return std::log(x);
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0) || !(b > 0)) throw ArgumentError("sample_beta: shapes must be > 0");
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  // a/(a+b) in log space
  return 1.0 / (1.0 + std::exp(lb - la));
}

}  // namespace hbm
