#include "mlgcp/first_order.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace mlgcp {

FirstOrderFit estimate_beta(const PointPattern& pattern,
                            const std::vector<ScalarField>& covariates, int baseline) {
  const int p = pattern.n_types;
  if (baseline < 0 || baseline >= p)
    throw std::out_of_range("estimate_beta: baseline out of range");

  if (covariates.empty()) {
    const auto counts = pattern.type_counts();
    FirstOrderFit fit;
    fit.first_order.beta = Eigen::MatrixXd::Zero(p, 1);
    for (int i = 0; i < p; ++i) {
      if (counts[i] < 1)
        throw std::invalid_argument("estimate_beta: empty type with no covariates");
      fit.first_order.beta(i, 0) =
          std::log(static_cast<double>(counts[i]) / counts[baseline]);
    }
    return fit;
  }
  return estimate_beta_newton(pattern, covariates, baseline);
}

FirstOrderFit estimate_beta_newton(const PointPattern& pattern,
                                   const std::vector<ScalarField>& covariates,
                                   int baseline) {
  const int p = pattern.n_types;
  if (baseline < 0 || baseline >= p)
    throw std::out_of_range("estimate_beta: baseline out of range");
  const int m = 1 + static_cast<int>(covariates.size());

  FirstOrderFit fit;
  fit.first_order.beta = Eigen::MatrixXd::Zero(p, m);
  fit.first_order.covariates = covariates;

  // conditional multinomial over pooled points: maximize
  //   sum_u log softmax(beta_{t(u)}' z(u)) with beta_baseline = 0
  const int n = static_cast<int>(pattern.points.size());
  Eigen::MatrixXd Z(n, m);
  for (int a = 0; a < n; ++a)
    Z.row(a) = fit.first_order.covariate_vector(pattern.points[a].x, pattern.points[a].y)
                   .transpose();

  // free parameters: rows != baseline, stacked
  const int nfree = (p - 1) * m;
  auto free_row = [&](int i) { return i < baseline ? i : i - 1; };

  Eigen::VectorXd par = Eigen::VectorXd::Zero(nfree);
  constexpr int kMaxIter = 100;
  constexpr double kNormCap = 50.0;

  for (int iter = 0; iter < kMaxIter; ++iter) {
    fit.iterations = iter + 1;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(nfree);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(nfree, nfree);

    for (int a = 0; a < n; ++a) {
      Eigen::VectorXd eta(p);
      for (int i = 0; i < p; ++i) {
        if (i == baseline) {
          eta(i) = 0.0;
          continue;
        }
        eta(i) = par.segment(free_row(i) * m, m).dot(Z.row(a));
      }
      const double mx = eta.maxCoeff();
      Eigen::VectorXd prob = (eta.array() - mx).exp();
      prob /= prob.sum();

      const int t = pattern.points[a].type;
      for (int i = 0; i < p; ++i) {
        if (i == baseline) continue;
        const double resid = (i == t ? 1.0 : 0.0) - prob(i);
        grad.segment(free_row(i) * m, m) += resid * Z.row(a).transpose();
        for (int j = 0; j < p; ++j) {
          if (j == baseline) continue;
          const double wij = prob(i) * ((i == j ? 1.0 : 0.0) - prob(j));
          hess.block(free_row(i) * m, free_row(j) * m, m, m).noalias() +=
              wij * Z.row(a).transpose() * Z.row(a);
        }
      }
    }

    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    par += step;
    if (par.norm() > kNormCap) {
      fit.separation_detected = true;
      par *= kNormCap / par.norm();
      break;
    }
    if (step.norm() < 1e-10) break;
    // contrasts still drifting outward at the iteration cap: quasi-separation
    if (iter == kMaxIter - 1 && par.norm() > 10.0 && step.norm() > 1e-4)
      fit.separation_detected = true;
  }

  for (int i = 0; i < p; ++i)
    if (i != baseline)
      fit.first_order.beta.row(i) = par.segment(free_row(i) * m, m).transpose();
  return fit;
}

}  // namespace mlgcp
