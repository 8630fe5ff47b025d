#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mlgcp/first_order.hpp"
#include "mlgcp/gaussian_field.hpp"

using namespace mlgcp;

namespace {

PointPattern counts_pattern(const std::vector<int>& counts, Window w = {0, 0, 1, 1}) {
  PointPattern pat;
  pat.window = w;
  pat.n_types = static_cast<int>(counts.size());
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < pat.n_types; ++i)
    for (int c = 0; c < counts[i]; ++c)
      pat.points.push_back({w.x0 + u(gen) * (w.x1 - w.x0), w.y0 + u(gen) * (w.y1 - w.y0), i});
  return pat;
}

}  // namespace

TEST_CASE("intercept-only contrasts are count log-ratios") {
  const PointPattern pat = counts_pattern({100, 206, 64});
  const FirstOrderFit fit = estimate_beta(pat, {}, 0);
  CHECK(fit.first_order.beta.rows() == 3);
  CHECK(fit.first_order.beta.cols() == 1);
  CHECK(fit.first_order.beta(0, 0) == 0.0);
  CHECK(fit.first_order.beta(1, 0) == doctest::Approx(std::log(206.0 / 100.0)).epsilon(1e-12));
  CHECK(fit.first_order.beta(2, 0) == doctest::Approx(std::log(64.0 / 100.0)).epsilon(1e-12));
  CHECK(fit.first_order.beta(1, 0) == doctest::Approx(0.72).epsilon(0.005));
  CHECK(fit.first_order.beta(2, 0) == doctest::Approx(-0.45).epsilon(0.015));
  CHECK_FALSE(fit.separation_detected);
}

TEST_CASE("rounded textbook values 0.72 and -0.45 at two decimals") {
  const PointPattern pat = counts_pattern({100, 206, 64});
  const FirstOrderFit fit = estimate_beta(pat, {}, 0);
  auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  CHECK(round2(fit.first_order.beta(1, 0)) == 0.72);
  CHECK(round2(fit.first_order.beta(2, 0)) == -0.45);
}

TEST_CASE("equal counts give zero contrasts") {
  const PointPattern pat = counts_pattern({50, 50, 50, 50});
  const FirstOrderFit fit = estimate_beta(pat, {}, 2);
  CHECK(fit.first_order.beta.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("baseline row is pinned to zero for any baseline choice") {
  const PointPattern pat = counts_pattern({30, 90, 60});
  for (int b = 0; b < 3; ++b) {
    const FirstOrderFit fit = estimate_beta(pat, {}, b);
    CHECK(fit.first_order.beta.row(b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Newton path agrees with the closed form when m = 0") {
  const PointPattern pat = counts_pattern({80, 140, 47});
  const FirstOrderFit closed = estimate_beta(pat, {}, 0);
  const FirstOrderFit newton = estimate_beta_newton(pat, {}, 0);
  CHECK((closed.first_order.beta - newton.first_order.beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("covariate contrasts recover the generating coefficients") {
  // thin a dominating Poisson pattern by type-specific log-linear weights in
  // a known covariate; the conditional multinomial recovers the contrasts
  const Window w{0, 0, 1, 1};
  const ScalarField Z = simulate_grf(w, 64, 64, {CorrFamily::Exponential, 0.1}, 11);
  const Eigen::MatrixXd gamma = [] {
    Eigen::MatrixXd g(3, 2);
    g << 0.0, 0.0, 0.4, -0.8, -0.3, 0.6;
    return g;
  }();

  PointPattern pat;
  pat.window = w;
  pat.n_types = 3;
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::poisson_distribution<int> pois(12000);
  const int n = pois(gen);
  for (int k = 0; k < n; ++k) {
    const double x = u(gen), y = u(gen);
    const double z = Z.value_at(x, y);
    Eigen::Vector3d wts;
    for (int i = 0; i < 3; ++i) wts(i) = std::exp(gamma(i, 0) + gamma(i, 1) * z);
    // assign a type with the conditional probabilities, keep every point
    double r = u(gen) * wts.sum();
    int type = 0;
    while (type < 2 && r > wts(type)) r -= wts(type), ++type;
    pat.points.push_back({x, y, type});
  }

  const FirstOrderFit fit = estimate_beta(pat, {Z}, 0);
  CHECK_FALSE(fit.separation_detected);
  CHECK(fit.first_order.beta(1, 0) == doctest::Approx(0.4).epsilon(0.2));
  CHECK(fit.first_order.beta(1, 1) == doctest::Approx(-0.8).epsilon(0.15));
  CHECK(fit.first_order.beta(2, 1) == doctest::Approx(0.6).epsilon(0.2));
}

TEST_CASE("empty type is rejected") {
  PointPattern pat = counts_pattern({40, 40});
  pat.n_types = 3;  // declared third type has no points
  CHECK_THROWS(estimate_beta(pat, {}, 0));
}

TEST_CASE("perfectly separated covariate is flagged") {
  // type decided by the sign of the covariate: contrasts diverge
  const Window w{0, 0, 1, 1};
  ScalarField Z;
  Z.window = w;
  Z.nx = Z.ny = 32;
  Z.values.resize(32 * 32);
  for (int iy = 0; iy < 32; ++iy)
    for (int ix = 0; ix < 32; ++ix) Z.values[iy * 32 + ix] = ix < 16 ? -1.0 : 1.0;

  PointPattern pat;
  pat.window = w;
  pat.n_types = 2;
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 400; ++k) {
    const double x = u(gen), y = u(gen);
    pat.points.push_back({x, y, Z.value_at(x, y) > 0.0 ? 1 : 0});
  }
  const FirstOrderFit fit = estimate_beta(pat, {Z}, 0);
  CHECK(fit.separation_detected);
}
