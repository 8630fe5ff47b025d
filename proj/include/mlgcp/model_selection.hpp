#pragma once

#include <cstdint>
#include <vector>

#include "mlgcp/optimizer.hpp"

namespace mlgcp {

enum class SelectionRule { Min, OneSE };

// mean/SE/raw scores for one (q, lambda) grid cell; scores are losses
// (negated validation log-likelihood over cross-type pairs)
struct CVCell {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> raw;  // K*L scores, ordered by (l, k)
  bool empty_fold = false;  // some fold had no cross-type validation pairs
};

struct CVResult {
  std::vector<int> q_grid;
  std::vector<double> lambda_grid;
  std::vector<std::vector<CVCell>> cells;  // [q index][lambda index]
  int K = 0, L = 0;
  int q_min = 0;
  int q_1se = 0;
  double lambda_star = 0.0;
};

CVCell cv_score(const LikelihoodContext& ctx, int q, double lambda, int K, int L,
                const OptimizerConfig& config, std::uint64_t rng_seed,
                int fold_max_iterations = 60);

int select_q(const std::vector<int>& q_grid, const std::vector<double>& means,
             const std::vector<double>& ses, SelectionRule rule);

CVResult select_q_lambda(const LikelihoodContext& ctx, const std::vector<int>& q_grid,
                         const std::vector<double>& lambda_grid, int K, int L,
                         const OptimizerConfig& config, std::uint64_t rng_seed,
                         int fold_max_iterations = 60);

}  // namespace mlgcp
