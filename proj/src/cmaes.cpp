// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
// rank-one plus rank-mu covariance updates, run on the unit cube.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "photonbench/optimizers.hpp"

namespace photonbench {

namespace {

constexpr int kMaxResamples = 100;

struct Strategy {
  std::size_t dim;
  std::size_t lambda;
  std::size_t mu;
  Eigen::VectorXd weights;
  double mu_eff;
  double c_sigma, d_sigma, c_c, c_1, c_mu, chi_n;

  Strategy(std::size_t d, std::size_t lambda_override) : dim(d) {
    const double n = static_cast<double>(d);
    lambda = lambda_override != 0 ? lambda_override : 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(n)));
    mu = lambda / 2;
    weights.resize(static_cast<Eigen::Index>(mu));
    for (std::size_t i = 0; i < mu; ++i)
      weights(static_cast<Eigen::Index>(i)) = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
    weights /= weights.sum();
    mu_eff = 1.0 / weights.squaredNorm();

    c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
    d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma;
    c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
    c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
    c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff));
    chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  }
};

}  // namespace

OptimizerResult run_cmaes(BudgetedObjective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto& bounds = objective.bounds();
  const std::size_t dim = objective.dimension();
  const auto n = static_cast<Eigen::Index>(dim);
  const Strategy st(dim, cfg.population_size);

  auto in_unit_cube = [](const Eigen::VectorXd& u) { return (u.array() >= 0.0).all() && (u.array() <= 1.0).all(); };
  auto to_x = [&](const Eigen::VectorXd& u) {
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      x[j] = std::clamp(bounds.lower[j] + u(i) * bounds.width(j), bounds.lower[j], bounds.upper[j]);
    }
    return x;
  };

  Eigen::VectorXd mean = Eigen::VectorXd::Constant(n, 0.5);
  double sigma = cfg.sigma0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd D = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd p_sigma = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p_c = Eigen::VectorXd::Zero(n);

  OptimizerResult result;
  result.min_covariance_eigenvalue = 1.0;

  std::vector<Eigen::VectorXd> samples(st.lambda, Eigen::VectorXd(n));
  std::vector<double> fitness(st.lambda);
  Eigen::VectorXd z(n);
  std::size_t generation = 0;

  while (!objective.exhausted()) {
    const std::size_t batch = std::min(st.lambda, objective.remaining());
    for (std::size_t k = 0; k < batch; ++k) {
      Eigen::VectorXd u(n);
      for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
        u = mean + sigma * (B * D.asDiagonal() * z);
        if (in_unit_cube(u)) break;
      }
      u = u.cwiseMax(0.0).cwiseMin(1.0);
      samples[k] = u;
      fitness[k] = objective(to_x(u));
    }
    if (batch < st.lambda) break;

    std::vector<std::size_t> order(st.lambda);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

    const Eigen::VectorXd old_mean = mean;
    mean.setZero();
    for (std::size_t i = 0; i < st.mu; ++i) mean += st.weights(static_cast<Eigen::Index>(i)) * samples[order[i]];

    // Step sizes of the selected points, measured from the old mean.
    Eigen::MatrixXd Y(n, static_cast<Eigen::Index>(st.mu));
    for (std::size_t i = 0; i < st.mu; ++i) Y.col(static_cast<Eigen::Index>(i)) = (samples[order[i]] - old_mean) / sigma;
    const Eigen::VectorXd y_w = (mean - old_mean) / sigma;

    const Eigen::MatrixXd inv_sqrt_C = B * D.cwiseInverse().asDiagonal() * B.transpose();
    p_sigma = (1.0 - st.c_sigma) * p_sigma + std::sqrt(st.c_sigma * (2.0 - st.c_sigma) * st.mu_eff) * (inv_sqrt_C * y_w);
    ++generation;
    const double ps_norm = p_sigma.norm();
    const double decay = 1.0 - std::pow(1.0 - st.c_sigma, 2.0 * static_cast<double>(generation));
    const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (static_cast<double>(dim) + 1.0)) * st.chi_n;
    p_c = (1.0 - st.c_c) * p_c + (h_sigma ? std::sqrt(st.c_c * (2.0 - st.c_c) * st.mu_eff) : 0.0) * y_w;

    const double delta_h = h_sigma ? 0.0 : st.c_c * (2.0 - st.c_c);
    Eigen::MatrixXd rank_mu = Y * st.weights.asDiagonal() * Y.transpose();
    C = (1.0 - st.c_1 - st.c_mu) * C + st.c_1 * (p_c * p_c.transpose() + delta_h * C) + st.c_mu * rank_mu;
    C = 0.5 * (C + C.transpose());

    sigma *= std::exp((st.c_sigma / st.d_sigma) * (ps_norm / st.chi_n - 1.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    Eigen::VectorXd evals = eig.eigenvalues();
    if (evals.minCoeff() <= 0.0) {
      // Rounding pushed C off the cone; shift it back.
      const double shift = -evals.minCoeff() + 1e-20 * std::max(1.0, evals.maxCoeff());
      C += shift * Eigen::MatrixXd::Identity(n, n);
      eig.compute(C);
      evals = eig.eigenvalues();
    }
    result.min_covariance_eigenvalue = std::min(result.min_covariance_eigenvalue, evals.minCoeff());
    B = eig.eigenvectors();
    D = evals.cwiseSqrt();
  }

  result.trajectory = objective.trajectory();
  result.best_x = objective.best_x();
  result.best_fitness = objective.trajectory().final_best();
  return result;
}

}  // namespace photonbench
