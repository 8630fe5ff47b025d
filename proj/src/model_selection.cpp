#include "mlgcp/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlgcp/rng.hpp"

namespace mlgcp {

namespace {

// log p_{titj}(u, v) of the conditional pair-type distribution
double pair_log_prob(const LikelihoodContext& ctx, const Theta& theta,
                     const PairEntry& e) {
  const int p = ctx.p;
  Eigen::MatrixXd s(p, p);
  for (int k = 0; k < p; ++k)
    for (int l = 0; l < p; ++l)
      s(k, l) = theta.log_g(k, l, e.r) + ctx.log_f(e.u, k) + ctx.log_f(e.v, l);
  const double m = s.maxCoeff();
  const double lse = m + std::log((s.array() - m).exp().sum());
  return s(e.ti, e.tj) - lse;
}

PairIndex training_pairs(const std::vector<PairIndex>& folds, int hold_out) {
  PairIndex train;
  train.R = folds[hold_out].R;
  train.n_types = folds[hold_out].n_types;
  for (int k = 0; k < static_cast<int>(folds.size()); ++k) {
    if (k == hold_out) continue;
    train.entries.insert(train.entries.end(), folds[k].entries.begin(),
                         folds[k].entries.end());
  }
  train.rebuild_buckets();
  return train;
}

}  // namespace

CVCell cv_score(const LikelihoodContext& ctx, int q, double lambda, int K, int L,
                const OptimizerConfig& config, std::uint64_t rng_seed,
                int fold_max_iterations) {
  if (K < 2 || K > 10) throw std::invalid_argument("cv_score: K must be in [2, 10]");
  if (L < 1) throw std::invalid_argument("cv_score: L must be >= 1");

  // warm start every fold fit from the full-data solution
  const FitResult full = fit(ctx, q, config, lambda, derive_seed(rng_seed, 0x5eed));
  OptimizerConfig fold_config = config;
  fold_config.max_outer_iterations = fold_max_iterations;

  CVCell cell;
  cell.raw.reserve(static_cast<std::size_t>(K) * L);
  for (int l = 0; l < L; ++l) {
    const auto folds = kfold_split(ctx.pairs, K, derive_seed(rng_seed, l));
    for (int k = 0; k < K; ++k) {
      const LikelihoodContext ctx_train =
          ctx.with_pairs(training_pairs(folds, k));
      const FitResult fr = fit(ctx_train, q, fold_config, lambda,
                               derive_seed(rng_seed, 0x1000 + l * K + k),
                               full.theta_hat);
      double score = 0.0;
      bool any_cross = false;
      for (const PairEntry& e : folds[k].entries) {
        if (e.ti == e.tj) continue;
        any_cross = true;
        score -= pair_log_prob(ctx, fr.theta_hat, e);
      }
      if (!any_cross) cell.empty_fold = true;
      cell.raw.push_back(score);
    }
  }

  const int n = static_cast<int>(cell.raw.size());
  double sum = 0.0;
  for (double s : cell.raw) sum += s;
  cell.mean = sum / n;
  double ss = 0.0;
  for (double s : cell.raw) ss += (s - cell.mean) * (s - cell.mean);
  cell.se = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
  return cell;
}

int select_q(const std::vector<int>& q_grid, const std::vector<double>& means,
             const std::vector<double>& ses, SelectionRule rule) {
  if (q_grid.empty() || q_grid.size() != means.size() || means.size() != ses.size())
    throw std::invalid_argument("select_q: grids and scores must align and be non-empty");

  // arg-min with smaller-q tie-break: grid is scanned in order, strict <
  std::size_t best = 0;
  for (std::size_t i = 1; i < means.size(); ++i)
    if (means[i] < means[best]) best = i;
  if (rule == SelectionRule::Min) return q_grid[best];

  const double threshold = means[best] + ses[best];
  std::size_t chosen = best;
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (means[i] <= threshold && q_grid[i] < q_grid[chosen]) chosen = i;
  }
  return q_grid[chosen];
}

CVResult select_q_lambda(const LikelihoodContext& ctx, const std::vector<int>& q_grid,
                         const std::vector<double>& lambda_grid, int K, int L,
                         const OptimizerConfig& config, std::uint64_t rng_seed,
                         int fold_max_iterations) {
  if (q_grid.empty() || lambda_grid.empty())
    throw std::invalid_argument("select_q_lambda: grids must be non-empty");
  if (std::find(lambda_grid.begin(), lambda_grid.end(), 0.0) == lambda_grid.end())
    throw std::invalid_argument("select_q_lambda: lambda grid must contain 0");

  CVResult result;
  result.q_grid = q_grid;
  result.lambda_grid = lambda_grid;
  result.K = K;
  result.L = L;
  result.cells.assign(q_grid.size(), std::vector<CVCell>(lambda_grid.size()));

  // step 1: q at lambda = 0
  const std::size_t zero_idx = static_cast<std::size_t>(
      std::find(lambda_grid.begin(), lambda_grid.end(), 0.0) - lambda_grid.begin());
  std::vector<double> means(q_grid.size()), ses(q_grid.size());
  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    result.cells[qi][zero_idx] =
        cv_score(ctx, q_grid[qi], 0.0, K, L, config,
                 derive_seed(rng_seed, 0x9000 + qi), fold_max_iterations);
    means[qi] = result.cells[qi][zero_idx].mean;
    ses[qi] = result.cells[qi][zero_idx].se;
  }
  result.q_min = select_q(q_grid, means, ses, SelectionRule::Min);
  result.q_1se = select_q(q_grid, means, ses, SelectionRule::OneSE);
  const std::size_t qmin_idx = static_cast<std::size_t>(
      std::find(q_grid.begin(), q_grid.end(), result.q_min) - q_grid.begin());

  // step 2: lambda at q_min; ties favor the larger (sparser) lambda
  result.lambda_star = 0.0;
  if (result.q_min > 0 && lambda_grid.size() > 1) {
    double best_mean = result.cells[qmin_idx][zero_idx].mean;
    for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
      if (li == zero_idx) continue;
      result.cells[qmin_idx][li] =
          cv_score(ctx, result.q_min, lambda_grid[li], K, L, config,
                   derive_seed(rng_seed, 0xa000 + li), fold_max_iterations);
      const double m = result.cells[qmin_idx][li].mean;
      if (m < best_mean ||
          (m == best_mean && lambda_grid[li] > result.lambda_star)) {
        best_mean = m;
        result.lambda_star = lambda_grid[li];
      }
    }
  }
  return result;
}

}  // namespace mlgcp
