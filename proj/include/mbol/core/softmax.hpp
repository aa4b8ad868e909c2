#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mbol/core/random.hpp"

namespace mbol {

/// Probabilities proportional to exp(-eta * loss[i]). The smallest loss is
/// subtracted first so importance weights as large as n / gamma cannot
/// underflow every term to zero.
inline std::vector<double> softmax_of_losses(std::span<const double> losses, double eta) {
  std::vector<double> p(losses.size());
  if (losses.empty()) return p;
  const double lo = *std::min_element(losses.begin(), losses.end());
  double z = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    p[i] = std::exp(-eta * (losses[i] - lo));
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

/// Same, from log-weights (probabilities proportional to exp(logw[i])).
inline std::vector<double> softmax_of_logweights(std::span<const double> logw) {
  std::vector<double> p(logw.size());
  if (logw.empty()) return p;
  const double hi = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    p[i] = std::exp(logw[i] - hi);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

/// Inverse-CDF draw; falls back to the last index on round-off.
inline std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline std::size_t sample_index(std::span<const double> probs, Stream& s) {
  return sample_index(probs, s.uniform());
}

}  // namespace mbol
