#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bps/random.hpp"

namespace bps {

/// An agent's step-ahead predictive distribution for one target.
///
/// `scale` is the squared scale H: for a normal it is the variance, for a
/// Student-T it is the scale such that (x - loc) / sqrt(H) ~ t_dof. Sample
/// sets carry raw draws; loc/scale then hold their mean and variance.
struct ForecastDensity {
  enum class Kind { normal, student_t, samples };

  Kind kind = Kind::normal;
  double loc = 0.0;
  double scale = 1.0;
  double dof = 0.0;
  std::vector<double> draws;

  static ForecastDensity normal(double loc, double variance);
  static ForecastDensity student_t(double loc, double scale, double dof);
  static ForecastDensity from_samples(std::vector<double> draws);

  void validate() const;

  double pdf(double y) const;
  double log_pdf(double y) const;
  double draw(Rng& rng) const;

  double mean() const;
  /// Infinite for Student-T with dof <= 2.
  double variance() const;
};

/// Silverman's rule-of-thumb bandwidth, 0.9 min(sd, IQR / 1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> draws);

/// Gaussian kernel density estimate at `y`. Uses Silverman's bandwidth
/// unless one is supplied. Throws std::invalid_argument for empty input.
double kernel_density(std::span<const double> draws, double y,
                      std::optional<double> bandwidth = std::nullopt);

double normal_pdf(double y, double mean, double variance);
double student_t_log_pdf(double y, double loc, double scale, double dof);

}  // namespace bps
