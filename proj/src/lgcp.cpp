#include "mlgcp/lgcp.hpp"

#include <cmath>

#include "mlgcp/rng.hpp"

namespace mlgcp {

void Theta::validate(double column_sum_tol) const {
  const int p = n_types();
  const int q = n_fields();
  if (alpha.rows() != p || alpha.cols() != q)
    throw std::invalid_argument("Theta: alpha must be p x q");
  if (phi.size() != p) throw std::invalid_argument("Theta: phi must have length p");
  for (int k = 0; k < q; ++k) {
    if (!(xi(k) > 0.0)) throw std::invalid_argument("Theta: xi must be positive");
    if (std::abs(alpha.col(k).sum()) > column_sum_tol)
      throw std::invalid_argument("Theta: alpha column does not sum to zero");
  }
  for (int i = 0; i < p; ++i) {
    if (sigma2(i) < 0.0) throw std::invalid_argument("Theta: sigma2 must be non-negative");
    if (!(phi(i) > 0.0)) throw std::invalid_argument("Theta: phi must be positive");
  }
}

double cross_pcf(const Theta& theta, int i, int j, double r) {
  if (i < 0 || j < 0 || i >= theta.n_types() || j >= theta.n_types())
    throw std::out_of_range("cross_pcf: type index out of range");
  if (r < 0.0) throw std::invalid_argument("cross_pcf: negative distance");
  return std::exp(theta.log_g(i, j, r));
}

Eigen::MatrixXd conditional_probs(const FirstOrder& first_order, const Theta& theta,
                                  const Eigen::VectorXd& z_u, const Eigen::VectorXd& z_v,
                                  double r) {
  const int p = theta.n_types();
  Eigen::MatrixXd log_num(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      log_num(i, j) = first_order.log_f(i, z_u) + first_order.log_f(j, z_v) +
                      theta.log_g(i, j, r);
  const double m = log_num.maxCoeff();
  Eigen::MatrixXd probs = (log_num.array() - m).exp();
  probs /= probs.sum();
  return probs;
}

PointPattern simulate_mlgcp(const SimulationSpec& spec) {
  const ScalarField& rho0 = spec.rho0;
  const int p = spec.theta.n_types();
  const int q = spec.theta.n_fields();
  spec.theta.validate();
  for (double v : rho0.values)
    if (!(v > 0.0))
      throw std::invalid_argument("simulate_mlgcp: rho0 must be strictly positive");

  const Window w = rho0.window;
  const int nx = rho0.nx;
  const int ny = rho0.ny;

  // latent fields: q common, then p type-specific, with derived seeds
  std::vector<ScalarField> common, specific;
  common.reserve(q);
  specific.reserve(p);
  std::uint64_t field_idx = 0;
  for (int k = 0; k < q; ++k)
    common.push_back(simulate_grf(w, nx, ny, {spec.field_family, spec.theta.xi(k)},
                                  derive_seed(spec.rng_seed, field_idx++)));
  for (int i = 0; i < p; ++i)
    specific.push_back(simulate_grf(w, nx, ny, {spec.field_family, spec.theta.phi(i)},
                                    derive_seed(spec.rng_seed, field_idx++)));

  PointPattern pattern;
  pattern.window = w;
  pattern.n_types = p;

  Rng rng(derive_seed(spec.rng_seed, 0xfffffULL));
  const double area = rho0.cell_area();

  for (int i = 0; i < p; ++i) {
    const double sigma = std::sqrt(spec.theta.sigma2(i));
    double mu = -spec.theta.sigma2(i) / 2.0;
    for (int k = 0; k < q; ++k) mu -= spec.theta.alpha(i, k) * spec.theta.alpha(i, k) / 2.0;

    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const double cx = rho0.cell_center_x(ix);
        const double cy = rho0.cell_center_y(iy);
        double log_lambda = std::log(rho0.at(ix, iy)) + mu;
        log_lambda += spec.gamma(i, 0);
        for (int c = 0; c < static_cast<int>(spec.covariates.size()); ++c)
          log_lambda += spec.gamma(i, 1 + c) * spec.covariates[c].value_at(cx, cy);
        for (int k = 0; k < q; ++k)
          log_lambda += spec.theta.alpha(i, k) * common[k].at(ix, iy);
        log_lambda += sigma * specific[i].at(ix, iy);

        const long count = rng.poisson(std::exp(log_lambda) * area);
        for (long c = 0; c < count; ++c) {
          Point pt;
          pt.x = w.x0 + (ix + rng.uniform()) * rho0.dx();
          pt.y = w.y0 + (iy + rng.uniform()) * rho0.dy();
          pt.type = i;
          pattern.points.push_back(pt);
        }
      }
    }
  }
  return pattern;
}

}  // namespace mlgcp
