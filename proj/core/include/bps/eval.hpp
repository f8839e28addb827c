#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bps/density.hpp"

namespace bps::eval {

/// Running mean of squared forecast errors. Throws on empty or mismatched input.
std::vector<double> msfe(std::span<const double> point_forecasts, std::span<const double> outcomes);

/// Running sum of log(method / baseline). Throws on non-positive values.
std::vector<double> lpdr(std::span<const double> method_density, std::span<const double> baseline_density);

/// Analytic density for normal/Student-T; Gaussian KDE for sample sets.
double density_value(const ForecastDensity& density, double y,
                     std::optional<double> bandwidth = std::nullopt);
double density_value(std::span<const double> samples, double y,
                     std::optional<double> bandwidth = std::nullopt);

struct EvalSeries {
  std::string method;
  int horizon = 1;
  std::vector<double> msfe;
  std::vector<double> lpdr;
  std::vector<double> fsd;
};

/// Cumulative metrics for one method against a baseline.
EvalSeries evaluate(std::string method, int horizon, std::span<const double> point_forecasts,
                    std::span<const double> forecast_sds, std::span<const double> density_at_outcome,
                    std::span<const double> baseline_density, std::span<const double> outcomes);

/// Improvement of `value` over `reference` in percent, as (reference - value) / reference * 100.
double percent_improvement(double reference, double value);

/// MC-empirical R^2 dependence measures of latent agent states.
struct DependenceSeries {
  Eigen::MatrixXd complete;  // T x J: 1 - Var(x_j | others) / Var(x_j)
  Eigen::MatrixXd paired;    // T x J(J-1)/2: squared correlations, pairs (0,1), (0,2), ..., (1,2), ...
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> singular;  // T x J flags
};

/// `draws[s]` is the s-th posterior draw of the T x J latent state matrix.
DependenceSeries mc_empirical_r2(std::span<const Eigen::MatrixXd> draws);

/// Index pairs in the column order of DependenceSeries::paired.
std::vector<std::pair<int, int>> agent_pairs(int agents);

}  // namespace bps::eval
