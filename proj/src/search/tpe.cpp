#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "nirs/error.hpp"
#include "nirs/search.hpp"

namespace nirs::search {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller; u1 is kept away from zero.
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9E3779B97F4A7C15ull);
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ParzenDensity ParzenDensity::fit(std::vector<double> points, double fallback_bandwidth) {
  ParzenDensity d;
  d.centers = std::move(points);
  d.bandwidth = fallback_bandwidth;
  const std::size_t m = d.centers.size();
  if (m >= 2) {
    const double mu = std::accumulate(d.centers.begin(), d.centers.end(), 0.0) / static_cast<double>(m);
    double ss = 0.0;
    for (double c : d.centers) ss += (c - mu) * (c - mu);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1));
    const double h = 1.06 * sd * std::pow(static_cast<double>(m), -0.2);
    if (std::isfinite(h) && h > 1e-12) d.bandwidth = h;
  }
  return d;
}

double ParzenDensity::log_pdf(double x) const {
  if (centers.empty()) return -std::numeric_limits<double>::infinity();
  // log-sum-exp over the mixture components.
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double z = (x - centers[i]) / bandwidth;
    terms[i] = -0.5 * z * z;
    top = std::max(top, terms[i]);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s / static_cast<double>(centers.size())) - std::log(bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

namespace {

double van_der_corput(std::uint64_t i) {
  double v = 0.0, f = 0.5;
  while (i > 0) {
    if (i & 1u) v += f;
    i >>= 1;
    f *= 0.5;
  }
  return v;
}

}  // namespace

double tpe_suggest(const std::vector<TpeObservation>& history, const TpeConfig& cfg, std::uint64_t seed,
                   int trial_index) {
  if (!(cfg.upper > cfg.lower)) throw ParameterError("tpe: empty bounds");
  if (trial_index < 0) throw ParameterError("tpe: negative trial index");
  const double width = cfg.upper - cfg.lower;

  std::mt19937_64 rng(seed ^ (0xD1B54A32D192ED03ull * static_cast<std::uint64_t>(trial_index + 1)));
  if (trial_index < cfg.n_startup || history.size() < 2) {
    // Rotated van der Corput sequence: the shift depends on the seed only.
    std::mt19937_64 shift_rng(seed);
    const double shift = uniform01(shift_rng);
    const double u = std::fmod(van_der_corput(static_cast<std::uint64_t>(trial_index) + 1) + shift, 1.0);
    return cfg.lower + width * u;
  }

  std::vector<std::size_t> order(history.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return history[a].loss < history[b].loss; });
  const auto n = history.size();
  std::size_t n_good = static_cast<std::size_t>(std::ceil(cfg.gamma * static_cast<double>(n)));
  n_good = std::clamp<std::size_t>(n_good, 1, n - 1);
  std::vector<double> good, bad;
  for (std::size_t i = 0; i < n; ++i) (i < n_good ? good : bad).push_back(history[order[i]].x);

  const ParzenDensity l = ParzenDensity::fit(good, cfg.fallback_bandwidth);
  const ParzenDensity g = ParzenDensity::fit(bad, cfg.fallback_bandwidth);

  double best_x = good.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < cfg.n_candidates; ++c) {
    const auto k = std::min(l.centers.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(l.centers.size())));
    double x = l.centers[k] + l.bandwidth * standard_normal(rng);
    x = std::clamp(x, cfg.lower, cfg.upper);
    const double score = l.log_pdf(x) - g.log_pdf(x);
    if (score > best_score) {
      best_score = score;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace nirs::search
