#pragma once

#include <Eigen/Dense>

#include "mlgcp/geometry.hpp"
#include "mlgcp/lgcp.hpp"

namespace mlgcp {

enum class Block { Alpha, Xi, Sigma2, Phi };

inline int block_dim(Block block, int p, int q) {
  switch (block) {
    case Block::Alpha: return p * q;
    case Block::Xi: return q;
    default: return p;
  }
}

// Pairs plus per-point cached first-order terms. The contrasts are held fixed
// (two-step estimation); only the second-order parameters vary downstream.
struct LikelihoodContext {
  PairIndex pairs;
  int p = 1;
  int q = 0;
  Eigen::MatrixXd log_f;  // n_points x p, log f_i(u) per point

  LikelihoodContext() = default;
  LikelihoodContext(const PointPattern& pattern, const FirstOrder& first_order, double R);

  // same cached first-order terms, different pair set (used by CV folds)
  LikelihoodContext with_pairs(PairIndex new_pairs) const {
    LikelihoodContext ctx(*this);
    ctx.pairs = std::move(new_pairs);
    return ctx;
  }
};

// negative log conditional composite likelihood l_-(theta)
double neg_log_cl(const LikelihoodContext& ctx, const Theta& theta);

// analytic gradient of l_- in the selected block (natural parameterization)
Eigen::VectorXd score(const LikelihoodContext& ctx, const Theta& theta, Block block);

// unbiased expected-Hessian estimator: sum over pairs of the covariance of the
// discrete gradient vector over the p^2 type-pair outcomes
Eigen::MatrixXd estimated_hessian(const LikelihoodContext& ctx, const Theta& theta,
                                  Block block);

struct BlockDerivatives {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// value, gradient, and estimated Hessian of the selected block in one pass
BlockDerivatives block_derivatives(const LikelihoodContext& ctx, const Theta& theta,
                                   Block block);

}  // namespace mlgcp
