#include "mlgcp/optimizer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mlgcp/rng.hpp"

namespace mlgcp {

void OptimizerConfig::validate() const {
  if (!(epsilon > 0.0) || !(inner_tol_alpha > 0.0) || !(inner_tol_eta > 0.0))
    throw std::invalid_argument("OptimizerConfig: tolerances must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("OptimizerConfig: mu must be positive");
  if (max_outer_iterations < 1 || inner_max_iterations < 1)
    throw std::invalid_argument("OptimizerConfig: iteration caps must be positive");
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_constraint_matrices(int p, int q) {
  if (p < 2 || q < 1)
    throw std::invalid_argument("build_constraint_matrices: need p >= 2, q >= 1");
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p - 1);
  B.topRows(p - 1) = Eigen::MatrixXd::Identity(p - 1, p - 1);
  B.row(p - 1).setConstant(-1.0);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(q, p * q);
  for (int c = 0; c < q; ++c)
    for (int m = 0; m < p; ++m) C(c, c * p + m) = 1.0;
  return {B, C};
}

double soft_threshold(double c, double lambda) {
  if (lambda >= std::abs(c)) return 0.0;
  return c > 0.0 ? c - lambda : c + lambda;
}

namespace {

Theta initial_theta(int p, int q, const OptimizerConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const double L = config.init_length_scale;
  Theta theta = Theta::zeros(p, q);
  for (int k = 0; k < q; ++k) {
    for (int i = 0; i < p; ++i) theta.alpha(i, k) = rng.uniform(-0.25, 0.25);
    theta.alpha.col(k).array() -= theta.alpha.col(k).mean();  // sum-to-zero
  }
  for (int k = 0; k < q; ++k) theta.xi(k) = rng.uniform(0.01, 0.04) * L;
  for (int i = 0; i < p; ++i) theta.sigma2(i) = rng.uniform(0.4, 0.6);
  for (int i = 0; i < p; ++i) theta.phi(i) = rng.uniform(0.01, 0.04) * L;
  return theta;
}

// eigenvalue-floored symmetric solve/sqrt helper
struct FlooredHessian {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  Eigen::VectorXd evals;  // floored
  bool usable = false;

  FlooredHessian(const Eigen::MatrixXd& H, double floor_rel) : eig(H) {
    evals = eig.eigenvalues();
    const double max_eig = evals.size() ? evals.maxCoeff() : 0.0;
    if (max_eig > 0.0) {
      const double floor = floor_rel * max_eig;
      evals = evals.cwiseMax(floor);
      usable = true;
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& v) const {
    return eig.eigenvectors() *
           (eig.eigenvectors().transpose() * v).cwiseQuotient(evals);
  }
  Eigen::MatrixXd floored() const {
    return eig.eigenvectors() * evals.asDiagonal() * eig.eigenvectors().transpose();
  }
};

double l1_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().sum(); }

Eigen::VectorXd vec_alpha(const Eigen::MatrixXd& alpha) {
  return Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
}

Eigen::MatrixXd unvec_alpha(const Eigen::VectorXd& v, int p, int q) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), p, q);
}

class BlockDescent {
 public:
  BlockDescent(const LikelihoodContext& ctx, const OptimizerConfig& config,
               double lambda)
      : ctx_(ctx), cfg_(config), lambda_(lambda) {}

  // penalized objective at a candidate theta
  double objective(const Theta& theta) const {
    return neg_log_cl(ctx_, theta) + lambda_ * l1_norm(theta.alpha);
  }

  // Armijo backtracking from `theta` towards `candidate` (same shape); dir_deriv
  // is an upper bound on the directional derivative of the penalized objective.
  // Returns true and overwrites theta/f_cur on acceptance.
  bool line_search(Theta& theta, double& f_cur, const Theta& candidate,
                   double dir_deriv) const {
    double t = 1.0;
    for (int h = 0; h <= cfg_.ls_max_halvings; ++h) {
      Theta trial = theta;
      trial.alpha = theta.alpha + t * (candidate.alpha - theta.alpha);
      trial.xi = theta.xi + t * (candidate.xi - theta.xi);
      trial.sigma2 = theta.sigma2 + t * (candidate.sigma2 - theta.sigma2);
      trial.phi = theta.phi + t * (candidate.phi - theta.phi);
      double f_trial;
      try {
        f_trial = objective(trial);
      } catch (const std::exception&) {
        // trial point outside the numerically valid region; keep shrinking
        t *= cfg_.ls_shrink;
        continue;
      }
      if (f_trial <= f_cur + cfg_.ls_armijo * t * dir_deriv && f_trial <= f_cur) {
        theta = trial;
        f_cur = f_trial;
        return true;
      }
      t *= cfg_.ls_shrink;
    }
    return false;
  }

  // quasi-Newton step on the log of a positive parameter sub-block
  bool update_log_block(Theta& theta, double& f_cur, Block block,
                        const std::vector<int>& free_idx) {
    if (free_idx.empty()) return true;
    const BlockDerivatives d = block_derivatives(ctx_, theta, block);
    const int nf = static_cast<int>(free_idx.size());

    Eigen::VectorXd tau(nf);
    for (int k = 0; k < nf; ++k) tau(k) = get_entry(theta, block, free_idx[k]);

    // chain rule through tau = exp(eta)
    Eigen::VectorXd e(nf);
    Eigen::MatrixXd H(nf, nf);
    for (int a = 0; a < nf; ++a) {
      e(a) = d.grad(free_idx[a]) * tau(a);
      for (int b = 0; b < nf; ++b)
        H(a, b) = d.hess(free_idx[a], free_idx[b]) * tau(a) * tau(b);
    }

    FlooredHessian fh(H, cfg_.eig_floor_rel);
    if (!fh.usable) return true;  // no curvature information; leave block alone
    Eigen::VectorXd dir = -fh.solve(e);
    if (!dir.allFinite() || dir.norm() == 0.0) return true;
    // cap the log-scale move so floored near-zero curvature cannot launch a
    // parameter to 0 or infinity in one step
    dir = dir.cwiseMax(-20.0).cwiseMin(20.0);

    Theta candidate = theta;
    for (int k = 0; k < nf; ++k)
      set_entry(candidate, block, free_idx[k], tau(k) * std::exp(dir(k)));
    // the candidate is the t=1 endpoint of the log-space segment; intermediate
    // line-search points interpolate the natural parameters, which preserves
    // positivity since both endpoints are positive
    return line_search(theta, f_cur, candidate, e.dot(dir));
  }

  // unpenalized alpha update through the psi change of variable
  bool update_alpha_unpenalized(Theta& theta, double& f_cur) {
    const int p = ctx_.p;
    const int q = theta.n_fields();
    const BlockDerivatives d = block_derivatives(ctx_, theta, Block::Alpha);
    const auto [B, C] = build_constraint_matrices(p, q);
    (void)C;

    // kron(I_q, B): columns of alpha are independent copies of the contrast map
    Eigen::MatrixXd Bfull = Eigen::MatrixXd::Zero(p * q, (p - 1) * q);
    for (int c = 0; c < q; ++c) Bfull.block(c * p, c * (p - 1), p, p - 1) = B;

    const Eigen::VectorXd e_psi = Bfull.transpose() * d.grad;
    const Eigen::MatrixXd H_psi = Bfull.transpose() * d.hess * Bfull;
    FlooredHessian fh(H_psi, cfg_.eig_floor_rel);
    if (!fh.usable) return true;
    const Eigen::VectorXd dir_psi = -fh.solve(e_psi);
    if (!dir_psi.allFinite()) return true;

    Theta candidate = theta;
    candidate.alpha =
        theta.alpha + unvec_alpha(Bfull * dir_psi, p, q);
    return line_search(theta, f_cur, candidate, e_psi.dot(dir_psi));
  }

  // lasso alpha update: augmented Lagrangian with cyclic coordinate
  // soft-thresholding, then line search on the penalized objective
  bool update_alpha_lasso(Theta& theta, double& f_cur, bool& cap_exceeded) {
    const int p = ctx_.p;
    const int q = theta.n_fields();
    const BlockDerivatives d = block_derivatives(ctx_, theta, Block::Alpha);

    FlooredHessian fh(d.hess, cfg_.eig_floor_rel);
    if (!fh.usable) return true;
    const Eigen::MatrixXd XtX = fh.floored();
    const Eigen::VectorXd alpha0 = vec_alpha(theta.alpha);
    const Eigen::VectorXd XtY = XtX * alpha0 - d.grad;

    Eigen::VectorXd a = alpha0;
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(q);
    bool inner_converged = false;
    for (long it = 0; it < cfg_.inner_max_iterations; ++it) {
      const Eigen::VectorXd a_prev = a;
      for (int idx = 0; idx < p * q; ++idx) {
        const int c = idx / p;
        const double g_aa = XtX(idx, idx);
        const double c1 = XtY(idx) - (XtX.row(idx).dot(a) - g_aa * a(idx));
        double colsum_others = -a(idx);
        for (int m = 0; m < p; ++m) colsum_others += a(c * p + m);
        const double c2 = cfg_.mu * colsum_others + eta(c);
        a(idx) = soft_threshold(c1 - c2, lambda_) / (g_aa + cfg_.mu);
      }
      Eigen::VectorXd col_sums(q);
      for (int c = 0; c < q; ++c) col_sums(c) = a.segment(c * p, p).sum();
      const Eigen::VectorXd eta_new = eta + cfg_.mu * col_sums;
      const double da = (a - a_prev).norm();
      const double de = (eta_new - eta).norm();
      eta = eta_new;
      if (da < cfg_.inner_tol_alpha && de < cfg_.inner_tol_eta) {
        inner_converged = true;
        break;
      }
    }
    if (!inner_converged) cap_exceeded = true;

    Theta candidate = theta;
    candidate.alpha = unvec_alpha(a, p, q);
    const double dir_deriv = d.grad.dot(a - alpha0) +
                             lambda_ * (a.lpNorm<1>() - alpha0.lpNorm<1>());
    return line_search(theta, f_cur, candidate, dir_deriv);
  }

 private:
  static double get_entry(const Theta& theta, Block block, int idx) {
    switch (block) {
      case Block::Xi: return theta.xi(idx);
      case Block::Sigma2: return theta.sigma2(idx);
      case Block::Phi: return theta.phi(idx);
      default: throw std::logic_error("get_entry: alpha handled separately");
    }
  }
  static void set_entry(Theta& theta, Block block, int idx, double value) {
    switch (block) {
      case Block::Xi: theta.xi(idx) = value; break;
      case Block::Sigma2: theta.sigma2(idx) = value; break;
      case Block::Phi: theta.phi(idx) = value; break;
      default: throw std::logic_error("set_entry: alpha handled separately");
    }
  }

  const LikelihoodContext& ctx_;
  const OptimizerConfig& cfg_;
  double lambda_;
};

}  // namespace

FitResult fit(const LikelihoodContext& ctx, int q, const OptimizerConfig& config,
              double lambda, std::uint64_t rng_seed,
              const std::optional<Theta>& warm_start) {
  config.validate();
  if (q < 0) throw std::invalid_argument("fit: q must be >= 0");
  if (lambda < 0.0) throw std::invalid_argument("fit: lambda must be >= 0");
  const int p = ctx.p;

  FitResult result;
  result.lambda = lambda;
  result.theta_hat = warm_start ? *warm_start : initial_theta(p, q, config, rng_seed);
  if (result.theta_hat.n_types() != p || result.theta_hat.n_fields() != q)
    throw std::invalid_argument("fit: warm start has wrong dimensions");

  // types whose same-type pair bucket carries no second-order information
  std::vector<int> free_types;
  for (int i = 0; i < p; ++i) {
    if (static_cast<int>(ctx.pairs.bucket(i, i).size()) < 2)
      result.frozen_types.push_back(i);
    else
      free_types.push_back(i);
  }

  BlockDescent descent(ctx, config, lambda);
  Theta& theta = result.theta_hat;
  double f_cur = descent.objective(theta);
  result.trace.push_back(f_cur);

  for (int n = 0; n < config.max_outer_iterations; ++n) {
    const double f_prev = f_cur;
    bool ok = true;

    if (q > 0) {
      if (lambda > 0.0)
        ok &= descent.update_alpha_lasso(theta, f_cur, result.inner_cap_exceeded);
      else
        ok &= descent.update_alpha_unpenalized(theta, f_cur);
      std::vector<int> all_fields(q);
      for (int k = 0; k < q; ++k) all_fields[k] = k;
      ok &= descent.update_log_block(theta, f_cur, Block::Xi, all_fields);
    }
    ok &= descent.update_log_block(theta, f_cur, Block::Sigma2, free_types);
    ok &= descent.update_log_block(theta, f_cur, Block::Phi, free_types);

    result.trace.push_back(f_cur);
    if (!ok) result.line_search_stalled = true;

    const double denom = std::abs(f_prev);
    if (denom == 0.0 || std::abs(f_cur - f_prev) / denom < config.epsilon) {
      result.converged = true;
      break;
    }
  }

  result.objective = f_cur;
  result.zero_mask.resize(p, q);
  for (int i = 0; i < p; ++i)
    for (int k = 0; k < q; ++k) result.zero_mask(i, k) = theta.alpha(i, k) == 0.0;
  return result;
}

std::vector<PcfCurvePoint> pcf_curves(const Theta& theta,
                                      const std::vector<double>& r_grid) {
  std::vector<PcfCurvePoint> out;
  const int p = theta.n_types();
  out.reserve(static_cast<std::size_t>(p) * (p + 1) / 2 * r_grid.size());
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j)
      for (double r : r_grid) out.push_back({i, j, r, cross_pcf(theta, i, j, r)});
  return out;
}

}  // namespace mlgcp
