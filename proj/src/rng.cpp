#include "scifactor/rng.hpp"

#include <cmath>
#include <numbers>

namespace scifactor {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a(stream)) + splitmix64(index));
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling on the top of the range to stay unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % n;
}

double Rng::normal() {
  // Box-Muller; the second variate is discarded to keep the state simple.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::lognormal(double mu, double sigma) {
  return std::exp(mu + sigma * normal());
}

std::uint32_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 30.0) {
    const double draw = std::round(mean + std::sqrt(mean) * normal());
    return draw < 0.0 ? 0U : static_cast<std::uint32_t>(draw);
  }
  // Knuth's multiplication method.
  const double limit = std::exp(-mean);
  std::uint32_t k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

std::uint32_t Rng::geometric(double mean) {
  if (mean <= 1.0) return 1;
  const double p = 1.0 / mean;
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return 1U + static_cast<std::uint32_t>(std::floor(std::log(u) / std::log1p(-p)));
}

}  // namespace scifactor
