#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chn2/geometry.hpp"
#include "chn2/parallel.hpp"
#include "chn2/random.hpp"

namespace chn2::chains {

// d_i < max(d_{i-1}, d_{i-2}) for every i >= 2.
inline bool is_second_order_descending(std::span<const double> lengths) {
  for (std::size_t i = 2; i < lengths.size(); ++i) {
    if (!(lengths[i] < std::max(lengths[i - 1], lengths[i - 2]))) return false;
  }
  return true;
}

// Number of repetition-free chains origin = x_0, x_1, ..., x_n with d_0, d_1 < R and
// d_i < max(d_{i-1}, d_{i-2}) for 2 <= i <= n-1. Every step is then < R, so the
// search only follows edges shorter than R.
inline std::uint64_t count_chains_from_origin(std::span<const std::vector<double>> points, std::size_t origin,
                                              std::size_t n, double R) {
  if (origin >= points.size()) throw std::out_of_range("count_chains_from_origin: origin out of range");
  if (n == 0) return 1;
  const Metric eu = Metric::euclidean();
  const std::size_t m = points.size();
  struct Nb {
    std::size_t to;
    double sq;
  };
  std::vector<std::vector<Nb>> adj(m);
  const double r2 = R * R;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double sq = eu.squared_distance(points[a], points[b]);
      if (sq < r2) {
        adj[a].push_back({b, sq});
        adj[b].push_back({a, sq});
      }
    }
  }
  std::vector<char> used(m, 0);
  std::uint64_t count = 0;
  // prev1/prev2 are the last two squared step lengths (monotone in the true lengths).
  auto dfs = [&](auto&& self, std::size_t at, std::size_t depth, double prev1, double prev2) -> void {
    if (depth == n) {
      ++count;
      return;
    }
    for (const Nb& e : adj[at]) {
      if (used[e.to]) continue;
      if (depth >= 2 && !(e.sq < std::max(prev1, prev2))) continue;
      used[e.to] = 1;
      self(self, e.to, depth + 1, e.sq, prev1);
      used[e.to] = 0;
    }
  };
  used[origin] = 1;
  dfs(dfs, origin, 0, 0.0, 0.0);
  return count;
}

// (lambda^2 w_d^2 R^{2d})^{n/2} / (n/2)! for even n.
inline double expected_chain_count_even(double lambda, double R, std::size_t d, std::size_t n) {
  if (n % 2 != 0) throw std::invalid_argument("expected_chain_count_even: n must be even");
  const double base = std::pow(lambda * unit_ball_volume(d) * std::pow(R, static_cast<double>(d)), 2.0);
  const double half = static_cast<double>(n / 2);
  return std::exp(half * std::log(base) - std::lgamma(half + 1.0));
}

// The closed form with the odd factor (lambda w_d R^d)^{n mod 2}, as printed for all n.
inline double expected_chain_count_closed_form(double lambda, double R, std::size_t d, std::size_t n) {
  const double v = lambda * unit_ball_volume(d) * std::pow(R, static_cast<double>(d));
  const double half = static_cast<double>(n / 2);
  return std::exp(half * std::log(v * v) - std::lgamma(half + 1.0)) * (n % 2 == 1 ? v : 1.0);
}

// Iterates E[X_{R,n+2}] = lambda^2 \int_{B_R(0)} \int_{B_R(x)} E[X_{max(|x|,|y-x|),n}] dy dx
// from E[X_{.,0}] = 1 or E[X_{r,1}] = lambda w_d r^d. Both integrals are reduced to radial
// ones and evaluated with adaptive Gauss-Kronrod quadrature. E[X_{r,n}] is homogeneous of
// degree n*d in r, so each step only needs the coefficient at r = 1.
inline double expected_chain_count_recursive(double lambda, double R, std::size_t d, std::size_t n) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double kTol = 1e-10;
  const double dd = static_cast<double>(d);
  const double omega = unit_ball_volume(d);
  const double sphere = dd * omega;  // surface area of the unit sphere

  std::size_t k = n % 2;
  double coef = (k == 0) ? 1.0 : lambda * omega;  // E[X_{r,k}] = coef * r^{k d}
  while (k < n) {
    const double deg = static_cast<double>(k) * dd;
    const auto inner = [&](double rho) {
      // \int_{B_1(x)} max(|x|, |y-x|)^{deg} dy with |x| = rho, split at the kink r = rho.
      const auto below = [&](double r) { return sphere * std::pow(r, dd - 1.0) * std::pow(rho, deg); };
      const auto above = [&](double r) { return sphere * std::pow(r, dd - 1.0) * std::pow(r, deg); };
      double v = 0.0;
      if (rho > 0.0) v += gauss_kronrod<double, 31>::integrate(below, 0.0, rho, 15, kTol);
      if (rho < 1.0) v += gauss_kronrod<double, 31>::integrate(above, rho, 1.0, 15, kTol);
      return v;
    };
    const auto outer = [&](double rho) { return sphere * std::pow(rho, dd - 1.0) * inner(rho); };
    coef = lambda * lambda * coef * gauss_kronrod<double, 31>::integrate(outer, 0.0, 1.0, 15, kTol);
    k += 2;
  }
  return coef * std::pow(R, static_cast<double>(n) * dd);
}

struct ChainCountConfig {
  double lambda = 1.0;
  double R = 1.0;
  std::size_t dim = 2;
  std::size_t n = 2;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("chains: lambda must be positive");
    if (!(R > 0.0)) throw std::invalid_argument("chains: R must be positive");
    if (dim == 0) throw std::invalid_argument("chains: dim must be >= 1");
    if (trials == 0) throw std::invalid_argument("chains: trials must be >= 1");
  }
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

// One Monte-Carlo trial: Poisson(lambda) points in B_{nR}(0) plus the origin.
inline std::uint64_t mc_chain_trial(const ChainCountConfig& cfg, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  const double radius = static_cast<double>(cfg.n) * cfg.R;
  std::vector<std::vector<double>> pts;
  pts.emplace_back(cfg.dim, 0.0);
  if (radius > 0.0) {
    const double mean = cfg.lambda * unit_ball_volume(cfg.dim) * std::pow(radius, static_cast<double>(cfg.dim));
    const std::uint64_t m = poisson_count(rng, mean);
    const std::vector<double> origin(cfg.dim, 0.0);
    for (std::uint64_t i = 0; i < m; ++i) pts.push_back(uniform_in_ball(rng, origin, radius));
  }
  return count_chains_from_origin(pts, 0, cfg.n, cfg.R);
}

inline McEstimate mc_chain_count(const ChainCountConfig& cfg) {
  cfg.validate();
  std::vector<double> counts(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    counts[t] = static_cast<double>(mc_chain_trial(cfg, derive_seed(cfg.seed, t)));
  });
  double sum = 0.0;
  for (double c : counts) sum += c;
  const double mean = sum / static_cast<double>(cfg.trials);
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  const double var = cfg.trials > 1 ? ss / static_cast<double>(cfg.trials - 1) : 0.0;
  return McEstimate{mean, std::sqrt(var / static_cast<double>(cfg.trials)), cfg.trials};
}

inline constexpr std::size_t kLongestChainCap = 40;

// Longest second-order descending chain (in edges) over all start points; exhaustive.
inline std::size_t longest_so_chain(std::span<const std::vector<double>> points, std::size_t cap = kLongestChainCap) {
  const std::size_t m = points.size();
  if (m > cap) throw std::invalid_argument("longest_so_chain: point count exceeds cap");
  if (m < 2) return 0;
  const Metric eu = Metric::euclidean();
  std::vector<double> sq(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) sq[a * m + b] = eu.squared_distance(points[a], points[b]);

  std::vector<char> used(m, 0);
  std::size_t best = 1;
  auto dfs = [&](auto&& self, std::size_t at, std::size_t depth, double prev1, double prev2) -> void {
    best = std::max(best, depth);
    if (best == m - 1) return;
    const double bound = std::max(prev1, prev2);
    for (std::size_t b = 0; b < m; ++b) {
      if (used[b]) continue;
      const double e = sq[at * m + b];
      if (depth >= 2 && !(e < bound)) continue;
      used[b] = 1;
      self(self, b, depth + 1, e, prev1);
      used[b] = 0;
    }
  };
  for (std::size_t s = 0; s < m && best < m - 1; ++s) {
    used[s] = 1;
    dfs(dfs, s, 0, 0.0, 0.0);
    used[s] = 0;
  }
  return best;
}

}  // namespace chn2::chains
