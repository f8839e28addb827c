#pragma once

#include <span>
#include <vector>

#include "bps/density.hpp"
#include "bps/random.hpp"

namespace bps::pools {

/// Sequential Bayesian model averaging weights.
struct BmaState {
  std::vector<double> probs;

  static BmaState uniform(std::size_t agents);
  void validate() const;
};

/// probs_j <- probs_j * density_j, renormalised. Throws NumericalError when
/// every weighted likelihood is zero.
BmaState bma_update(const BmaState& state, std::span<const double> density_values);

/// Mixture sum_j w_j h_j with fixed weights; equal weights give the linear pool.
class LinearPool {
 public:
  LinearPool(std::vector<ForecastDensity> components, std::vector<double> weights);

  double pdf(double y) const;
  double draw(Rng& rng) const;
  double mean() const;
  double variance() const;
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<ForecastDensity> components_;
  std::vector<double> weights_;
};

LinearPool linear_pool(std::vector<ForecastDensity> densities);
/// BMA mixture of the agents' densities under the current model probabilities.
LinearPool bma_mixture(std::vector<ForecastDensity> densities, const BmaState& state);

struct LogPoolOptions {
  int nodes = 4096;  // Simpson panels
};

/// Equal-weight geometric pool: density proportional to prod_j h_j(y)^(1/J),
/// normalised by composite Simpson quadrature after mapping the real line
/// onto (-pi/2, pi/2) with y = centre + spread * tan(u).
class LogPool {
 public:
  explicit LogPool(std::vector<ForecastDensity> components, const LogPoolOptions& opts = {});

  double pdf(double y) const;
  double log_pdf(double y) const;
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double log_normaliser() const { return log_z_; }

 private:
  double unnormalised_log(double y) const;

  std::vector<ForecastDensity> components_;
  double log_z_ = 0.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

LogPool log_pool(std::vector<ForecastDensity> densities, const LogPoolOptions& opts = {});

}  // namespace bps::pools
