#include "bps/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace bps {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace

ForecastDensity ForecastDensity::normal(double loc, double variance) {
  ForecastDensity d;
  d.kind = Kind::normal;
  d.loc = loc;
  d.scale = variance;
  d.validate();
  return d;
}

ForecastDensity ForecastDensity::student_t(double loc, double scale, double dof) {
  ForecastDensity d;
  d.kind = Kind::student_t;
  d.loc = loc;
  d.scale = scale;
  d.dof = dof;
  d.validate();
  return d;
}

ForecastDensity ForecastDensity::from_samples(std::vector<double> draws) {
  if (draws.empty()) throw std::invalid_argument("ForecastDensity: empty sample set");
  ForecastDensity d;
  d.kind = Kind::samples;
  const double n = static_cast<double>(draws.size());
  d.loc = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : draws) ss += (x - d.loc) * (x - d.loc);
  d.scale = draws.size() > 1 ? ss / (n - 1.0) : 0.0;
  d.draws = std::move(draws);
  return d;
}

void ForecastDensity::validate() const {
  switch (kind) {
    case Kind::normal:
      if (!(scale > 0.0)) throw std::invalid_argument("ForecastDensity: scale must be > 0");
      break;
    case Kind::student_t:
      if (!(scale > 0.0)) throw std::invalid_argument("ForecastDensity: scale must be > 0");
      if (!(dof > 0.0)) throw std::invalid_argument("ForecastDensity: dof must be > 0");
      break;
    case Kind::samples:
      if (draws.empty()) throw std::invalid_argument("ForecastDensity: empty sample set");
      break;
  }
}

double normal_pdf(double y, double mean, double variance) {
  const double z = y - mean;
  return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double student_t_log_pdf(double y, double loc, double scale, double dof) {
  const double z2 = (y - loc) * (y - loc) / scale;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi * scale) - 0.5 * (dof + 1.0) * std::log1p(z2 / dof);
}

double ForecastDensity::log_pdf(double y) const {
  switch (kind) {
    case Kind::normal: {
      const double z = y - loc;
      return -0.5 * z * z / scale - 0.5 * std::log(2.0 * std::numbers::pi * scale);
    }
    case Kind::student_t:
      return student_t_log_pdf(y, loc, scale, dof);
    case Kind::samples:
      return std::log(kernel_density(draws, y));
  }
  return -std::numeric_limits<double>::infinity();
}

double ForecastDensity::pdf(double y) const {
  if (kind == Kind::samples) return kernel_density(draws, y);
  return std::exp(log_pdf(y));
}

double ForecastDensity::draw(Rng& rng) const {
  switch (kind) {
    case Kind::normal:
      return draw_normal(rng, loc, std::sqrt(scale));
    case Kind::student_t:
      return draw_student_t(rng, loc, scale, dof);
    case Kind::samples: {
      std::uniform_int_distribution<std::size_t> pick(0, draws.size() - 1);
      return draws[pick(rng)];
    }
  }
  return loc;
}

double ForecastDensity::mean() const { return loc; }

double ForecastDensity::variance() const {
  switch (kind) {
    case Kind::normal:
    case Kind::samples:
      return scale;
    case Kind::student_t:
      return dof > 2.0 ? scale * dof / (dof - 2.0) : std::numeric_limits<double>::infinity();
  }
  return scale;
}

double silverman_bandwidth(std::span<const double> draws) {
  if (draws.empty()) throw std::invalid_argument("silverman_bandwidth: empty sample");
  const double n = static_cast<double>(draws.size());
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : draws) ss += (x - mean) * (x - mean);
  const double sd = draws.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(std::abs(mean), 1.0) * 1e-6;
  return 0.9 * spread * std::pow(n, -0.2);
}

double kernel_density(std::span<const double> draws, double y, std::optional<double> bandwidth) {
  if (draws.empty()) throw std::invalid_argument("kernel_density: empty sample");
  const double h = bandwidth.value_or(silverman_bandwidth(draws));
  if (!(h > 0.0)) throw std::invalid_argument("kernel_density: bandwidth must be > 0");
  double acc = 0.0;
  for (double x : draws) {
    const double z = (y - x) / h;
    acc += std::exp(-0.5 * z * z);
  }
  return acc / (static_cast<double>(draws.size()) * h * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace bps
