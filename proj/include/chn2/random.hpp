#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chn2/geometry.hpp"

namespace chn2 {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for trial/seed `index` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline double uniform_in(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  double x = u(rng);
  while (!(x >= lo && x < hi)) x = u(rng);
  return x;
}

inline std::vector<double> uniform_in_window(Rng& rng, const Window& w) {
  std::vector<double> x(w.dim());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = uniform_in(rng, w.lo()[j], w.hi()[j]);
  return x;
}

// Uniform point in the open ball of radius r around c (rejection from the bounding cube).
inline std::vector<double> uniform_in_ball(Rng& rng, std::span<const double> c, double r) {
  std::vector<double> x(c.size());
  for (;;) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double t = uniform_in(rng, -1.0, 1.0);
      x[j] = t;
      s += t * t;
    }
    if (s < 1.0) break;
  }
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = c[j] + r * x[j];
  return x;
}

inline std::uint64_t poisson_count(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> p(mean);
  return p(rng);
}

}  // namespace chn2
