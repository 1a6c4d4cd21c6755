#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "lsbeta/error.hpp"

namespace lsbeta {

// Monotone maps from latent distance to an affinity in (0, 1].
enum class AffinityTransform { ExpNegD, ExpNegDSquared, InverseOnePlusD };

inline std::string to_string(AffinityTransform t) {
  switch (t) {
    case AffinityTransform::ExpNegD: return "exp_neg_d";
    case AffinityTransform::ExpNegDSquared: return "exp_neg_d_squared";
    case AffinityTransform::InverseOnePlusD: return "inverse_one_plus_d";
  }
  return "?";
}

inline AffinityTransform parse_transform(std::string_view name) {
  if (name == "exp_neg_d") return AffinityTransform::ExpNegD;
  if (name == "exp_neg_d_squared") return AffinityTransform::ExpNegDSquared;
  if (name == "inverse_one_plus_d") return AffinityTransform::InverseOnePlusD;
  throw ConfigError("unknown affinity transform '" + std::string(name) + "'");
}

inline double affinity(AffinityTransform t, double d) {
  switch (t) {
    case AffinityTransform::ExpNegD: return std::exp(-d);
    case AffinityTransform::ExpNegDSquared: return std::exp(-d * d);
    case AffinityTransform::InverseOnePlusD: return 1.0 / (1.0 + d);
  }
  return 0.0;
}

}  // namespace lsbeta
