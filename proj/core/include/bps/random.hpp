#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace bps {

using Rng = std::mt19937_64;

/// Deterministic independent stream for (seed, ids...). Used to give every
/// worker, window and forecast cell its own generator so results do not
/// depend on scheduling.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

double draw_normal(Rng& rng);
double draw_normal(Rng& rng, double mean, double sd);

/// Gamma with the given shape and *rate*. A zero shape yields exactly 0.
double draw_gamma(Rng& rng, double shape, double rate);

double draw_beta(Rng& rng, double a, double b);

/// Location/squared-scale Student-T: (x - loc) / sqrt(scale) ~ t_dof.
double draw_student_t(Rng& rng, double loc, double scale, double dof);

double draw_uniform(Rng& rng);

/// Draw from N(mean, cov). `cov` must be symmetric positive semi-definite;
/// a Cholesky factorisation is tried first, falling back to a clipped
/// eigendecomposition for singular inputs.
Eigen::VectorXd draw_mvn(Rng& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

}  // namespace bps
