#include "bps/pools.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bps/error.hpp"

namespace bps::pools {

BmaState BmaState::uniform(std::size_t agents) {
  if (agents == 0) throw std::invalid_argument("BmaState: need at least one model");
  return BmaState{std::vector<double>(agents, 1.0 / static_cast<double>(agents))};
}

void BmaState::validate() const {
  if (probs.empty()) throw std::invalid_argument("BmaState: empty probability vector");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("BmaState: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("BmaState: probabilities must sum to 1");
}

BmaState bma_update(const BmaState& state, std::span<const double> density_values) {
  if (density_values.size() != state.probs.size())
    throw std::invalid_argument("bma_update: one density value per model required");
  BmaState out{std::vector<double>(state.probs.size())};
  double total = 0.0;
  for (std::size_t j = 0; j < out.probs.size(); ++j) {
    if (!(density_values[j] >= 0.0)) throw std::invalid_argument("bma_update: density values must be >= 0");
    out.probs[j] = state.probs[j] * density_values[j];
    total += out.probs[j];
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("bma_update: every model assigns zero likelihood to the outcome");
  for (double& p : out.probs) p /= total;
  return out;
}

LinearPool::LinearPool(std::vector<ForecastDensity> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw std::invalid_argument("LinearPool: need at least one component");
  if (weights_.size() != components_.size())
    throw std::invalid_argument("LinearPool: one weight per component required");
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("LinearPool: weights must have positive sum");
  for (double& w : weights_) w /= total;
}

double LinearPool::pdf(double y) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j)
    if (weights_[j] > 0.0) acc += weights_[j] * components_[j].pdf(y);
  return acc;
}

double LinearPool::draw(Rng& rng) const {
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  return components_[pick(rng)].draw(rng);
}

double LinearPool::mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) m += weights_[j] * components_[j].mean();
  return m;
}

double LinearPool::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    if (weights_[j] == 0.0) continue;
    const double d = components_[j].mean() - m;
    v += weights_[j] * (components_[j].variance() + d * d);
  }
  return v;
}

LinearPool linear_pool(std::vector<ForecastDensity> densities) {
  const std::size_t J = densities.size();
  return LinearPool(std::move(densities), std::vector<double>(J, 1.0));
}

LinearPool bma_mixture(std::vector<ForecastDensity> densities, const BmaState& state) {
  return LinearPool(std::move(densities), state.probs);
}

LogPool::LogPool(std::vector<ForecastDensity> components, const LogPoolOptions& opts)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("LogPool: need at least one component");
  if (opts.nodes < 2) throw std::invalid_argument("LogPool: bad quadrature options");

  // Centre on the pooled mean; the spread uses each component's variance
  // when finite and its squared scale otherwise.
  const double J = static_cast<double>(components_.size());
  double centre = 0.0;
  for (const auto& c : components_) centre += c.mean() / J;
  double spread = 0.0;
  for (const auto& c : components_) {
    const double var = std::isfinite(c.variance()) ? c.variance() : c.scale;
    const double d = c.mean() - centre;
    spread += (var + d * d) / J;
  }
  const double sd = std::sqrt(spread);

  // Endpoints map to +-infinity where the integrand vanishes, so they are skipped.
  const int panels = opts.nodes + (opts.nodes % 2);
  const double half_pi = 2.0 * std::atan(1.0);
  const double step = 2.0 * half_pi / panels;
  std::vector<double> logf(static_cast<std::size_t>(panels + 1), -INFINITY);
  std::vector<double> ys(static_cast<std::size_t>(panels + 1), 0.0);
  for (int i = 1; i < panels; ++i) {
    const double u = -half_pi + i * step;
    const double c = std::cos(u);
    const auto k = static_cast<std::size_t>(i);
    ys[k] = centre + sd * std::tan(u);
    logf[k] = unnormalised_log(ys[k]) + std::log(sd / (c * c));
  }
  const double top = *std::max_element(logf.begin(), logf.end());
  if (!std::isfinite(top)) throw NumericalError("log_pool: product of densities vanishes");

  double z = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  for (int i = 1; i < panels; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double f = (i % 2 == 1 ? 4.0 : 2.0) * std::exp(logf[k] - top);
    z += f;
    m1 += f * ys[k];
    m2 += f * ys[k] * ys[k];
  }
  z *= step / 3.0;
  m1 *= step / 3.0;
  m2 *= step / 3.0;
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("log_pool: non-integrable density product");
  log_z_ = top + std::log(z);
  mean_ = m1 / z;
  variance_ = std::max(m2 / z - mean_ * mean_, 0.0);
}

double LogPool::unnormalised_log(double y) const {
  double acc = 0.0;
  for (const auto& c : components_) acc += c.log_pdf(y);
  return acc / static_cast<double>(components_.size());
}

double LogPool::log_pdf(double y) const { return unnormalised_log(y) - log_z_; }

double LogPool::pdf(double y) const { return std::exp(log_pdf(y)); }

LogPool log_pool(std::vector<ForecastDensity> densities, const LogPoolOptions& opts) {
  return LogPool(std::move(densities), opts);
}

}  // namespace bps::pools
