#include "bps/eval.hpp"

#include <cmath>
#include <stdexcept>

#include <algorithm>

#include <Eigen/LU>
#include <Eigen/QR>

namespace bps::eval {

std::vector<double> msfe(std::span<const double> point_forecasts, std::span<const double> outcomes) {
  if (point_forecasts.empty()) throw std::invalid_argument("msfe: empty input");
  if (point_forecasts.size() != outcomes.size()) throw std::invalid_argument("msfe: length mismatch");
  std::vector<double> out(point_forecasts.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double e = outcomes[t] - point_forecasts[t];
    acc += e * e;
    out[t] = acc / static_cast<double>(t + 1);
  }
  return out;
}

std::vector<double> lpdr(std::span<const double> method_density, std::span<const double> baseline_density) {
  if (method_density.empty()) throw std::invalid_argument("lpdr: empty input");
  if (method_density.size() != baseline_density.size()) throw std::invalid_argument("lpdr: length mismatch");
  std::vector<double> out(method_density.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (!(method_density[t] > 0.0) || !(baseline_density[t] > 0.0))
      throw std::invalid_argument("lpdr: density values must be positive");
    if (method_density[t] != baseline_density[t]) acc += std::log(method_density[t] / baseline_density[t]);
    out[t] = acc;
  }
  return out;
}

double density_value(const ForecastDensity& density, double y, std::optional<double> bandwidth) {
  if (density.kind == ForecastDensity::Kind::samples) return kernel_density(density.draws, y, bandwidth);
  return density.pdf(y);
}

double density_value(std::span<const double> samples, double y, std::optional<double> bandwidth) {
  return kernel_density(samples, y, bandwidth);
}

EvalSeries evaluate(std::string method, int horizon, std::span<const double> point_forecasts,
                    std::span<const double> forecast_sds, std::span<const double> density_at_outcome,
                    std::span<const double> baseline_density, std::span<const double> outcomes) {
  if (forecast_sds.size() != point_forecasts.size())
    throw std::invalid_argument("evaluate: forecast SDs must align with point forecasts");
  EvalSeries out;
  out.method = std::move(method);
  out.horizon = horizon;
  out.msfe = msfe(point_forecasts, outcomes);
  out.lpdr = lpdr(density_at_outcome, baseline_density);
  out.fsd.assign(forecast_sds.begin(), forecast_sds.end());
  return out;
}

double percent_improvement(double reference, double value) { return (reference - value) / reference * 100.0; }

std::vector<std::pair<int, int>> agent_pairs(int agents) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < agents; ++i)
    for (int j = i + 1; j < agents; ++j) out.emplace_back(i, j);
  return out;
}

DependenceSeries mc_empirical_r2(std::span<const Eigen::MatrixXd> draws) {
  if (draws.size() < 2) throw std::invalid_argument("mc_empirical_r2: need at least two draws");
  const Eigen::Index T = draws.front().rows();
  const Eigen::Index J = draws.front().cols();
  for (const auto& d : draws)
    if (d.rows() != T || d.cols() != J) throw std::invalid_argument("mc_empirical_r2: draws differ in shape");

  const auto pairs = agent_pairs(static_cast<int>(J));
  DependenceSeries out;
  out.complete.setZero(T, J);
  out.paired.setZero(T, static_cast<Eigen::Index>(pairs.size()));
  out.singular.setConstant(T, J, false);

  const double S = static_cast<double>(draws.size());
  Eigen::MatrixXd X(static_cast<Eigen::Index>(draws.size()), J);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < draws.size(); ++s) X.row(static_cast<Eigen::Index>(s)) = draws[s].row(t);
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centred = X.rowwise() - mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / (S - 1.0);

    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      const double denom = cov(i, i) * cov(j, j);
      out.paired(t, static_cast<Eigen::Index>(p)) =
          denom > 0.0 ? std::clamp(cov(i, j) * cov(i, j) / denom, 0.0, 1.0) : 1.0;
    }

    // Complete-conditional: Var(x_j | rest) = 1 / (Sigma^-1)_jj.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
    lu.setThreshold(1e-12);
    if (J == 1) {
      out.complete(t, 0) = 0.0;
      continue;
    }
    if (!lu.isInvertible()) {
      // A singular covariance means some agent is an exact linear function of
      // others; each agent involved in that dependence is flagged with R^2 = 1.
      const Eigen::MatrixXd kernel = lu.kernel();
      for (Eigen::Index j = 0; j < J; ++j) {
        const bool involved = kernel.row(j).cwiseAbs().maxCoeff() > 1e-8 || cov(j, j) <= 0.0;
        if (involved) {
          out.complete(t, j) = 1.0;
          out.singular(t, j) = true;
        } else {
          std::vector<Eigen::Index> rest;
          for (Eigen::Index i = 0; i < J; ++i)
            if (i != j) rest.push_back(i);
          const Eigen::MatrixXd s_oo = cov(rest, rest);
          const Eigen::VectorXd s_oj = cov(rest, j);
          const Eigen::VectorXd coef = s_oo.completeOrthogonalDecomposition().solve(s_oj);
          out.complete(t, j) = std::clamp(s_oj.dot(coef) / cov(j, j), 0.0, 1.0);
        }
      }
      continue;
    }
    const Eigen::MatrixXd precision = lu.inverse();
    for (Eigen::Index j = 0; j < J; ++j)
      out.complete(t, j) = std::clamp(1.0 - 1.0 / (precision(j, j) * cov(j, j)), 0.0, 1.0);
  }
  return out;
}

}  // namespace bps::eval
