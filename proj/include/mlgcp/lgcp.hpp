#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mlgcp/gaussian_field.hpp"
#include "mlgcp/geometry.hpp"

namespace mlgcp {

// Second-order parameter bundle: loadings on the common latent fields, their
// correlation scales, and the type-specific variance/scale pairs. Columns of
// alpha sum to zero (identifiability).
struct Theta {
  Eigen::MatrixXd alpha;   // p x q
  Eigen::VectorXd xi;      // q, > 0
  Eigen::VectorXd sigma2;  // p, >= 0
  Eigen::VectorXd phi;     // p, > 0

  int n_types() const { return static_cast<int>(sigma2.size()); }
  int n_fields() const { return static_cast<int>(xi.size()); }

  static Theta zeros(int p, int q) {
    Theta t;
    t.alpha = Eigen::MatrixXd::Zero(p, q);
    t.xi = Eigen::VectorXd::Constant(q, 0.02);
    t.sigma2 = Eigen::VectorXd::Zero(p);
    t.phi = Eigen::VectorXd::Constant(p, 0.02);
    return t;
  }

  void validate(double column_sum_tol = 1e-8) const;

  // log g_ij(r), the exponent of the cross PCF
  double log_g(int i, int j, double r) const {
    double s = 0.0;
    for (int k = 0; k < n_fields(); ++k)
      s += alpha(i, k) * alpha(j, k) * std::exp(-r / xi(k));
    if (i == j) s += sigma2(i) * std::exp(-r / phi(i));
    return s;
  }
};

double cross_pcf(const Theta& theta, int i, int j, double r);

// Log-linear first-order contrasts relative to a baseline type whose row is
// identically zero. With no covariates, beta has a single intercept column.
struct FirstOrder {
  Eigen::MatrixXd beta;                // p x m (m >= 1; column 0 is the intercept)
  std::vector<ScalarField> covariates; // m - 1 spatial covariate rasters

  int n_types() const { return static_cast<int>(beta.rows()); }
  int n_covariates() const { return static_cast<int>(covariates.size()); }

  static FirstOrder uniform(int p) {
    FirstOrder fo;
    fo.beta = Eigen::MatrixXd::Zero(p, 1);
    return fo;
  }

  // covariate vector z(u) = (1, z_1(u), ..., z_{m-1}(u))
  Eigen::VectorXd covariate_vector(double x, double y) const {
    Eigen::VectorXd z(1 + n_covariates());
    z(0) = 1.0;
    for (int c = 0; c < n_covariates(); ++c) z(1 + c) = covariates[c].value_at(x, y);
    return z;
  }

  double log_f(int i, const Eigen::VectorXd& z) const { return beta.row(i).dot(z); }
};

// p x p matrix of conditional type-pair probabilities p_ij for a pair of
// locations with covariate vectors z_u, z_v at distance r. The unspecified
// background intensity cancels by construction.
Eigen::MatrixXd conditional_probs(const FirstOrder& first_order, const Theta& theta,
                                  const Eigen::VectorXd& z_u, const Eigen::VectorXd& z_v,
                                  double r);

struct SimulationSpec {
  ScalarField rho0;                    // strictly positive background intensity
  Eigen::MatrixXd gamma;               // p x m regression coefficients (not contrasts)
  std::vector<ScalarField> covariates; // m - 1 rasters (intercept implicit)
  Theta theta;
  CorrFamily field_family = CorrFamily::Exponential;
  std::uint64_t rng_seed = 1;
};

PointPattern simulate_mlgcp(const SimulationSpec& spec);

}  // namespace mlgcp
