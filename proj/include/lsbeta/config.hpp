#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "lsbeta/affinity.hpp"
#include "lsbeta/error.hpp"

namespace lsbeta {

enum class CoefficientPrior { Zellner, Diffuse };

/// Step sizes of the random-walk proposals, one per parameter block. A zero
/// step freezes the block.
struct ProposalScales {
  double a = 0.5;
  double b = 0.5;
  double log_gamma = 0.05;
  double z = 0.3;
  double w = 0.3;
  double beta = 0.5;  // multiplies a Cholesky factor of (X'X)^{-1}
  double log_phi = 0.05;

  void validate() const {
    for (double s : {a, b, log_gamma, z, w, beta, log_phi})
      if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("proposal scales must be finite and non-negative");
  }
};

struct ModelConfig {
  int latent_dim = 2;

  // sigma2_a, sigma2_b ~ Inv-Gamma(a_sigma, b_sigma)
  double a_sigma = 1.0;
  double b_sigma = 1.0;
  // log gamma ~ N(mu_gamma, sigma2_gamma)
  double mu_gamma = 0.5;
  double sigma2_gamma = 1.0;
  // beta_i ~ N(0, g (X'X)^{-1}); g <= 0 selects g = P
  CoefficientPrior coefficient_prior = CoefficientPrior::Zellner;
  double g = 0.0;
  double sigma2_B = 100.0;
  // phi ~ Gamma(a_phi, b_phi), rate parameterization
  double a_phi = 1.0;
  double b_phi = 0.1;

  long iterations = 55000;
  long burn_in = 5000;
  long thin = 10;
  ProposalScales scales;
  bool adapt = true;
  double target_accept_scalar = 0.44;
  double target_accept_block = 0.234;

  std::uint64_t seed = 1;
  AffinityTransform transform = AffinityTransform::ExpNegD;
  double affinity_epsilon = 1e-10;
  bool clamp_affinity = true;

  // Leave out the beta term from the Z/W acceptance ratios.
  bool cut_feedback = false;
  // Draw missing votes each iteration; when off they are skipped.
  bool impute_missing = true;
  // Include the beta-regression likelihood at all (off = prior on B, phi).
  bool beta_likelihood = true;

  // data screening
  double lopsided_lo = 0.025;
  double lopsided_hi = 0.975;
  bool rate_counts_missing = false;

  // evaluation
  long ppc_draws = 20;
  long ppc_replicates = 100;
  double cred_level = 0.95;
  long bic_param_count = 0;  // <= 0 selects the default count
  long bic_n_obs = 0;        // <= 0 selects the number of observed cells
  std::string party_a;
  std::string party_b;
  long robustness_burn_in = 500;
  long robustness_passes = 2;
  bool robustness_full_refit = false;

  double g_for(std::size_t n_bills) const { return g > 0.0 ? g : static_cast<double>(n_bills); }

  void validate() const {
    if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    for (double v : {a_sigma, b_sigma, sigma2_gamma, sigma2_B, a_phi, b_phi, affinity_epsilon})
      if (!(v > 0.0)) throw ConfigError("prior hyperparameters must be strictly positive");
    if (!std::isfinite(mu_gamma)) throw ConfigError("mu_gamma must be finite");
    if (iterations < 1 || burn_in < 0 || thin < 1) throw ConfigError("iterations and thin must be >= 1, burn_in >= 0");
    if (burn_in > iterations) throw ConfigError("burn_in must not exceed iterations");
    if (!(affinity_epsilon < 0.5)) throw ConfigError("affinity_epsilon must be below 0.5");
    if (!(cred_level > 0.0 && cred_level < 1.0)) throw ConfigError("cred_level must lie in (0,1)");
    scales.validate();
  }
};

}  // namespace lsbeta
