#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mlgcp/likelihood.hpp"

namespace mlgcp {

struct OptimizerConfig {
  double epsilon = 1e-5;           // relative function convergence
  double inner_tol_alpha = 1e-10;  // augmented Lagrangian alpha tolerance
  double inner_tol_eta = 1e-10;    // augmented Lagrangian multiplier tolerance
  double mu = 1.0;                 // augmented Lagrangian penalty
  int max_outer_iterations = 200;
  long inner_max_iterations = 10000;
  double ls_shrink = 0.5;
  double ls_armijo = 1e-4;
  int ls_max_halvings = 30;
  double eig_floor_rel = 1e-8;     // eigenvalue floor, relative to the largest
  double init_length_scale = 1.0;  // shorter window side; scales xi/phi init ranges

  void validate() const;
};

struct FitResult {
  Theta theta_hat;
  double objective = 0.0;  // final l_- plus penalty when lambda > 0
  double lambda = 0.0;
  std::vector<double> trace;  // objective after each outer iteration
  bool converged = false;
  bool line_search_stalled = false;
  bool inner_cap_exceeded = false;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> zero_mask;  // p x q
  std::vector<int> frozen_types;  // types with too few same-type pairs
};

// B (p x (p-1)) removes the sum-to-zero redundancy via alpha = B psi;
// C (q x pq) expresses the per-column sum constraints on vectorized alpha.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_constraint_matrices(int p, int q);

double soft_threshold(double c, double lambda);

// Cyclic block descent; lambda = 0 uses the psi change of variable for alpha,
// lambda > 0 the augmented-Lagrangian coordinate soft-threshold update.
FitResult fit(const LikelihoodContext& ctx, int q, const OptimizerConfig& config,
              double lambda, std::uint64_t rng_seed,
              const std::optional<Theta>& warm_start = std::nullopt);

inline FitResult fit(const LikelihoodContext& ctx, int q, const OptimizerConfig& config,
                     std::uint64_t rng_seed) {
  return fit(ctx, q, config, 0.0, rng_seed);
}

inline FitResult fit_lasso(const LikelihoodContext& ctx, int q,
                           const OptimizerConfig& config, double lambda,
                           std::uint64_t rng_seed,
                           const std::optional<Theta>& warm_start = std::nullopt) {
  if (!(lambda > 0.0)) throw std::invalid_argument("fit_lasso: lambda must be positive");
  return fit(ctx, q, config, lambda, rng_seed, warm_start);
}

// PCF curves implied by a Theta on an r grid, flattened as (i, j, r, g_ij)
struct PcfCurvePoint {
  int i, j;
  double r, g;
};
std::vector<PcfCurvePoint> pcf_curves(const Theta& theta, const std::vector<double>& r_grid);

}  // namespace mlgcp
