#include "mlgcp/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlgcp {

LikelihoodContext::LikelihoodContext(const PointPattern& pattern,
                                     const FirstOrder& first_order, double R) {
  p = pattern.n_types;
  q = 0;  // set by the caller/optimizer when a Theta is chosen
  pairs = enumerate_pairs(pattern, R);
  const int n = static_cast<int>(pattern.points.size());
  log_f.resize(n, p);
  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXd z =
        first_order.covariate_vector(pattern.points[a].x, pattern.points[a].y);
    for (int i = 0; i < p; ++i) log_f(a, i) = first_order.log_f(i, z);
  }
}

namespace {

constexpr int kChunk = 2048;

// pairwise tree reduction over per-chunk partials; result is independent of
// the number of threads that produced the partials
template <typename T, typename Combine>
T tree_reduce(std::vector<T>& parts, Combine combine, T empty) {
  if (parts.empty()) return empty;
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t k = 0; k + 1 < parts.size(); k += 2)
      next.push_back(combine(parts[k], parts[k + 1]));
    if (parts.size() % 2) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts[0];
}

struct PairTerms {
  Eigen::MatrixXd log_num;  // p x p: log f_i(u) + log f_j(v) + s_ij(r)
  double lse = 0.0;         // log-sum-exp over all p^2 outcomes
  Eigen::VectorXd w;        // exp(-r/xi_k)
  Eigen::VectorXd eu;       // exp(-r/phi_i)
};

PairTerms pair_terms(const LikelihoodContext& ctx, const Theta& theta,
                     const PairEntry& e) {
  const int p = theta.n_types();
  const int q = theta.n_fields();
  PairTerms t;
  t.w.resize(q);
  for (int k = 0; k < q; ++k) t.w(k) = std::exp(-e.r / theta.xi(k));
  t.eu.resize(p);
  for (int i = 0; i < p; ++i) t.eu(i) = std::exp(-e.r / theta.phi(i));

  Eigen::MatrixXd s = theta.alpha * t.w.asDiagonal() * theta.alpha.transpose();
  s.diagonal() += theta.sigma2.cwiseProduct(t.eu);

  t.log_num = s;
  t.log_num.colwise() += ctx.log_f.row(e.u).transpose();
  t.log_num.rowwise() += ctx.log_f.row(e.v);

  const double m = t.log_num.maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) acc += std::exp(t.log_num(i, j) - m);
  t.lse = m + std::log(acc);

  if (t.lse - t.log_num(e.ti, e.tj) > 700.0)
    throw std::domain_error("neg_log_cl: conditional probability underflow for pair (" +
                            std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") types (" + std::to_string(e.ti + 1) + "," +
                            std::to_string(e.tj + 1) + ") r=" + std::to_string(e.r));
  return t;
}

// gradient of log rho_kl with respect to the selected block, for all p^2
// outcomes; rows indexed by outcome (k * p + l), columns by parameter
Eigen::MatrixXd outcome_gradients(const Theta& theta, const PairTerms& t, Block block,
                                  double r) {
  const int p = theta.n_types();
  const int q = theta.n_fields();
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(p * p, block_dim(block, p, q));
  switch (block) {
    case Block::Alpha:
      // alpha laid out column-wise: parameter index c * p + m
      for (int k = 0; k < p; ++k)
        for (int l = 0; l < p; ++l)
          for (int c = 0; c < q; ++c) {
            Z(k * p + l, c * p + k) += t.w(c) * theta.alpha(l, c);
            Z(k * p + l, c * p + l) += t.w(c) * theta.alpha(k, c);
          }
      break;
    case Block::Xi:
      for (int k = 0; k < p; ++k)
        for (int l = 0; l < p; ++l)
          for (int c = 0; c < q; ++c)
            Z(k * p + l, c) = theta.alpha(k, c) * theta.alpha(l, c) * t.w(c) * r /
                              (theta.xi(c) * theta.xi(c));
      break;
    case Block::Sigma2:
      for (int k = 0; k < p; ++k) Z(k * p + k, k) = t.eu(k);
      break;
    case Block::Phi:
      for (int k = 0; k < p; ++k)
        Z(k * p + k, k) = theta.sigma2(k) * t.eu(k) * r / (theta.phi(k) * theta.phi(k));
      break;
  }
  return Z;
}

}  // namespace

double neg_log_cl(const LikelihoodContext& ctx, const Theta& theta) {
  theta.validate();
  const auto& entries = ctx.pairs.entries;
  const int n_chunks = (static_cast<int>(entries.size()) + kChunk - 1) / kChunk;
  std::vector<double> parts(n_chunks, 0.0);
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < n_chunks; ++c) {
    try {
      double acc = 0.0;
      const int lo = c * kChunk;
      const int hi = std::min<int>(lo + kChunk, static_cast<int>(entries.size()));
      for (int e = lo; e < hi; ++e) {
        const PairTerms t = pair_terms(ctx, theta, entries[e]);
        acc += t.lse - t.log_num(entries[e].ti, entries[e].tj);
      }
      parts[c] = acc;
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return tree_reduce(parts, [](double a, double b) { return a + b; }, 0.0);
}

BlockDerivatives block_derivatives(const LikelihoodContext& ctx, const Theta& theta,
                                   Block block) {
  theta.validate();
  const int p = theta.n_types();
  const int d = block_dim(block, p, theta.n_fields());
  const auto& entries = ctx.pairs.entries;
  const int n_chunks = (static_cast<int>(entries.size()) + kChunk - 1) / kChunk;

  struct Partial {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
  };
  std::vector<Partial> parts(n_chunks);
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < n_chunks; ++c) {
    try {
      Partial part;
      part.grad = Eigen::VectorXd::Zero(d);
      part.hess = Eigen::MatrixXd::Zero(d, d);
      const int lo = c * kChunk;
      const int hi = std::min<int>(lo + kChunk, static_cast<int>(entries.size()));
      for (int e = lo; e < hi; ++e) {
        const PairEntry& pe = entries[e];
        const PairTerms t = pair_terms(ctx, theta, pe);
        part.value += t.lse - t.log_num(pe.ti, pe.tj);

        const Eigen::MatrixXd Z = outcome_gradients(theta, t, block, pe.r);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
        for (int k = 0; k < p; ++k) {
          for (int l = 0; l < p; ++l) {
            const double prob = std::exp(t.log_num(k, l) - t.lse);
            const auto z = Z.row(k * p + l);
            mean.noalias() += prob * z.transpose();
            second.noalias() += prob * z.transpose() * z;
          }
        }
        part.grad += mean - Z.row(pe.ti * p + pe.tj).transpose();
        part.hess += second - mean * mean.transpose();
      }
      parts[c] = std::move(part);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  Partial empty;
  empty.grad = Eigen::VectorXd::Zero(d);
  empty.hess = Eigen::MatrixXd::Zero(d, d);
  Partial total = tree_reduce(
      parts,
      [](const Partial& a, const Partial& b) {
        Partial out;
        out.value = a.value + b.value;
        out.grad = a.grad + b.grad;
        out.hess = a.hess + b.hess;
        return out;
      },
      empty);

  BlockDerivatives out;
  out.value = total.value;
  out.grad = std::move(total.grad);
  // symmetrize against roundoff
  out.hess = 0.5 * (total.hess + total.hess.transpose());
  return out;
}

Eigen::VectorXd score(const LikelihoodContext& ctx, const Theta& theta, Block block) {
  return block_derivatives(ctx, theta, block).grad;
}

Eigen::MatrixXd estimated_hessian(const LikelihoodContext& ctx, const Theta& theta,
                                  Block block) {
  return block_derivatives(ctx, theta, block).hess;
}

}  // namespace mlgcp
