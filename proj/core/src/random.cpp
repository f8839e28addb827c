#include "bps/random.hpp"

#include <cmath>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace bps {

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (stream.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffULL));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto id : stream) push(id);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

// Boost's ziggurat sampler keeps no state between calls, so it is safe to
// construct per draw.
double draw_normal(Rng& rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double draw_normal(Rng& rng, double mean, double sd) { return mean + sd * draw_normal(rng); }

// Marsaglia-Tsang squeeze; shapes below one use the x U^(1/shape) boost.
double draw_gamma(Rng& rng, double shape, double rate) {
  if (shape <= 0.0) return 0.0;
  const double a = shape < 1.0 ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double x = 0.0;
  for (;;) {
    double z = 0.0;
    double v = 0.0;
    do {
      z = draw_normal(rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = draw_uniform(rng);
    if (u < 1.0 - 0.0331 * z * z * z * z || std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
      x = d * v;
      break;
    }
  }
  if (shape < 1.0) {
    double u = draw_uniform(rng);
    while (u <= 0.0) u = draw_uniform(rng);
    x *= std::pow(u, 1.0 / shape);
  }
  return x / rate;
}

double draw_beta(Rng& rng, double a, double b) {
  const double x = draw_gamma(rng, a, 1.0);
  const double y = draw_gamma(rng, b, 1.0);
  if (x + y <= 0.0) return 1.0;
  return x / (x + y);
}

double draw_student_t(Rng& rng, double loc, double scale, double dof) {
  const double phi = draw_gamma(rng, 0.5 * dof, 0.5 * dof);
  return loc + std::sqrt(scale / phi) * draw_normal(rng);
}

double draw_uniform(Rng& rng) {
  // 53 random bits into [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::VectorXd draw_mvn(Rng& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const Eigen::Index p = mean.size();
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z(i) = draw_normal(rng);

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return mean + llt.matrixL() * z;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + eig.eigenvectors() * root.cwiseProduct(z);
}

}  // namespace bps
