#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace lsbeta {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives an independent seed for a named substream of a top-level seed.
/// Every piece of randomness in the library flows through one of these so a
/// partial re-run (fit, impute, ppc, simulate, ...) is reproducible.
inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t index = 0) {
  std::uint64_t h = detail::splitmix64(seed ^ detail::fnv1a(name));
  return detail::splitmix64(h + detail::splitmix64(index + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  Rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0)
      : engine_(substream_seed(seed, stream, index)) {}

  double uniform() { return unif_(engine_); }

  // Uniform on the open interval (0,1); safe to take the log of.
  double uniform_open() {
    double u;
    do {
      u = unif_(engine_);
    } while (u <= 0.0);
    return u;
  }

  double normal() { return norm_(engine_); }
  double normal(double mean, double sd) { return mean + sd * norm_(engine_); }

  // Gamma with shape/rate parameterization.
  double gamma(double shape, double rate) {
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(engine_);
  }

  double inverse_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }

  // log of a Gamma(shape, 1) draw; stays finite for tiny shapes by using
  // Gamma(a) = Gamma(a + 1) * U^(1/a).
  double log_gamma_draw(double shape) {
    if (shape >= 1.0) return std::log(gamma(shape, 1.0));
    return std::log(gamma(shape + 1.0, 1.0)) + std::log(uniform_open()) / shape;
  }

  double beta(double p, double q) {
    const double lx = log_gamma_draw(p);
    const double ly = log_gamma_draw(q);
    return 1.0 / (1.0 + std::exp(ly - lx));
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace lsbeta
