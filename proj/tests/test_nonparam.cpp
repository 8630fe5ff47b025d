#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mlgcp/first_order.hpp"
#include "mlgcp/nonparametrics.hpp"

using namespace mlgcp;

namespace {

double field_integral(const ScalarField& f) {
  const double cell = (f.window.x1 - f.window.x0) * (f.window.y1 - f.window.y0) /
                      (double(f.nx) * f.ny);
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * cell;
}

PointPattern poisson_pattern(double intensity, int p, std::uint64_t seed,
                             Window w = {0, 0, 1, 1}) {
  PointPattern pat;
  pat.window = w;
  pat.n_types = p;
  std::mt19937_64 gen(seed);
  std::poisson_distribution<int> pois(intensity * (w.x1 - w.x0) * (w.y1 - w.y0));
  std::uniform_real_distribution<double> ux(w.x0, w.x1), uy(w.y0, w.y1);
  std::uniform_int_distribution<int> ut(0, p - 1);
  const int n = pois(gen);
  for (int k = 0; k < n; ++k) pat.points.push_back({ux(gen), uy(gen), ut(gen)});
  return pat;
}

}  // namespace

TEST_CASE("kernel intensity integrates to the point count") {
  const PointPattern pat = poisson_pattern(300.0, 2, 3);
  for (double b : {0.03, 0.08}) {
    const ScalarField f = kernel_intensity(pat, b, 128, 128);
    CHECK(field_integral(f) == doctest::Approx(double(pat.size())).epsilon(1e-3));
  }
}

TEST_CASE("edge correction quadruples the corner value of a single point") {
  // a point exactly in the window corner keeps only a quarter of its kernel
  // mass inside; the correction divides by that mass
  PointPattern pat;
  pat.window = {0, 0, 1, 1};
  pat.n_types = 1;
  pat.points = {{0.0, 0.0, 0}};
  const double b = 0.05;
  const ScalarField corner = kernel_intensity(pat, b, 256, 256);
  PointPattern centre = pat;
  centre.points[0] = {0.5, 0.5, 0};
  const ScalarField mid = kernel_intensity(centre, b, 256, 256);
  // peak height at the point location, relative to an uncorrected kernel
  const double peak_mid = mid.value_at(0.5, 0.5);
  const double peak_corner = corner.value_at(1e-9, 1e-9);
  CHECK(peak_corner == doctest::Approx(4.0 * peak_mid).epsilon(0.02));
  CHECK(field_integral(corner) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("kernel intensity mean tracks a homogeneous Poisson intensity") {
  const int reps = 40;
  double mean_mid = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const PointPattern pat = poisson_pattern(250.0, 1, 900 + rep);
    const ScalarField f = kernel_intensity(pat, 0.07, 64, 64);
    mean_mid += f.value_at(0.5, 0.5) / reps;
  }
  CHECK(mean_mid == doctest::Approx(250.0).epsilon(0.06));
}

TEST_CASE("background estimate with one type reduces to the kernel intensity") {
  const PointPattern pat = poisson_pattern(200.0, 1, 5);
  const FirstOrder fo = FirstOrder::uniform(1);
  const ScalarField a = estimate_rho0(pat, fo, 0.06, 64, 64);
  const ScalarField b = kernel_intensity(pat, 0.06, 64, 64);
  for (std::size_t k = 0; k < a.values.size(); ++k)
    CHECK(a.values[k] == doctest::Approx(b.values[k]).epsilon(1e-12));
}

TEST_CASE("background estimate divides out the first-order contrasts exactly") {
  // doubling f_i for a type scales that type's contribution by exp(-beta)
  const PointPattern pat = poisson_pattern(300.0, 2, 15);
  FirstOrder fo = FirstOrder::uniform(2);
  const ScalarField base = estimate_rho0(pat, fo, 0.06, 64, 64);

  // push all type-1 weight up by log 2; its contribution must halve, which we
  // verify through the identity rho0_hat = (k_0 + k_1 * exp(-beta_1)) / 2
  FirstOrder fo2 = FirstOrder::uniform(2);
  fo2.beta(1, 0) = std::log(2.0);
  const ScalarField scaled = estimate_rho0(pat, fo2, 0.06, 64, 64);

  PointPattern only0 = pat, only1 = pat;
  only0.points.erase(std::remove_if(only0.points.begin(), only0.points.end(),
                                    [](const Point& p) { return p.type != 0; }),
                     only0.points.end());
  only1.points.erase(std::remove_if(only1.points.begin(), only1.points.end(),
                                    [](const Point& p) { return p.type != 1; }),
                     only1.points.end());
  only0.n_types = only1.n_types = 1;
  const ScalarField k0 = kernel_intensity(only0, 0.06, 64, 64);
  const ScalarField k1 = kernel_intensity(only1, 0.06, 64, 64);
  for (std::size_t k = 0; k < base.values.size(); ++k) {
    CHECK(base.values[k] ==
          doctest::Approx(0.5 * (k0.values[k] + k1.values[k])).epsilon(1e-10));
    CHECK(scaled.values[k] ==
          doctest::Approx(0.5 * (k0.values[k] + 0.5 * k1.values[k])).epsilon(1e-10));
  }
}

TEST_CASE("leave-one-type-out estimate ignores the left-out type") {
  const PointPattern pat = poisson_pattern(300.0, 3, 25);
  const FirstOrder fo = FirstOrder::uniform(3);
  const ScalarField minus2 = diggle_rho0_minus_i(pat, fo, 0.06, 2, 64, 64);

  PointPattern no2 = pat;
  no2.points.erase(std::remove_if(no2.points.begin(), no2.points.end(),
                                  [](const Point& p) { return p.type == 2; }),
                   no2.points.end());
  // same estimator on the reduced pattern with the remaining two types
  PointPattern relabel = no2;
  relabel.n_types = 2;
  const ScalarField direct = estimate_rho0(relabel, FirstOrder::uniform(2), 0.06, 64, 64);
  for (std::size_t k = 0; k < minus2.values.size(); ++k)
    CHECK(minus2.values[k] == doctest::Approx(direct.values[k]).epsilon(1e-10));
  CHECK_THROWS(diggle_rho0_minus_i(pat, fo, 0.06, 3, 64, 64));
}

TEST_CASE("bandwidth selection lands near agreement for a Poisson pattern") {
  const PointPattern pat = poisson_pattern(500.0, 2, 35);
  const FirstOrder fo = FirstOrder::uniform(2);
  std::vector<double> grid;
  for (double b = 0.02; b <= 0.201; b += 0.01) grid.push_back(b);
  const BandwidthSelection sel = select_bandwidth(pat, fo, grid, 64, 64);
  CHECK(!sel.degenerate);
  CHECK(sel.b_star >= grid.front());
  CHECK(sel.b_star <= grid.back());
  CHECK(sel.omega / sel.w == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("bandwidth criterion is degenerate with a single type") {
  const PointPattern pat = poisson_pattern(200.0, 1, 45);
  const BandwidthSelection sel =
      select_bandwidth(pat, FirstOrder::uniform(1), {0.05, 0.1}, 64, 64);
  CHECK(sel.degenerate);
}

TEST_CASE("non-parametric PCF of a Poisson pattern hovers around one") {
  const std::vector<double> r_grid{0.03, 0.05, 0.07, 0.09};
  std::vector<double> mean(r_grid.size(), 0.0);
  const int reps = 30;
  ScalarField rho;
  rho.window = {0, 0, 1, 1};
  rho.nx = rho.ny = 8;
  rho.values.assign(64, 200.0);
  const std::vector<ScalarField> intensities{rho, rho};
  for (int rep = 0; rep < reps; ++rep) {
    const PointPattern pat = poisson_pattern(400.0, 2, 1100 + rep);
    const auto c = nonparam_pcf(pat, intensities, 0, 1, r_grid, 0.01);
    for (std::size_t k = 0; k < r_grid.size(); ++k) mean[k] += c[k] / reps;
  }
  for (std::size_t k = 0; k < r_grid.size(); ++k)
    CHECK(mean[k] == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("non-parametric PCF is symmetric in the type arguments") {
  const PointPattern pat = poisson_pattern(300.0, 2, 55);
  ScalarField rho;
  rho.window = {0, 0, 1, 1};
  rho.nx = rho.ny = 8;
  rho.values.assign(64, 150.0);
  const std::vector<ScalarField> intensities{rho, rho};
  const std::vector<double> r_grid{0.02, 0.05, 0.08};
  const auto a = nonparam_pcf(pat, intensities, 0, 1, r_grid, 0.01);
  const auto b = nonparam_pcf(pat, intensities, 1, 0, r_grid, 0.01);
  for (std::size_t k = 0; k < r_grid.size(); ++k)
    CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  CHECK_THROWS(nonparam_pcf(pat, intensities, 0, 1, r_grid, 0.0));
  CHECK_THROWS(nonparam_pcf(pat, intensities, 0, 1, {-0.1}, 0.01));
}

TEST_CASE("PCF ratio of a bucket against itself is identically one") {
  const PointPattern pat = poisson_pattern(350.0, 2, 65);
  const FirstOrder fo = FirstOrder::uniform(2);
  std::vector<double> r_grid{0.02, 0.04, 0.06, 0.08};
  const RatioCurve rc = pcf_ratio_nonparam(pat, fo, {0, 1}, {0, 1}, r_grid, 0.01);
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    if (rc.missing[k]) continue;
    CHECK(rc.value[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("PCF ratio is invariant to a constant first-order shift") {
  const PointPattern pat = poisson_pattern(350.0, 2, 75);
  FirstOrder fo = FirstOrder::uniform(2);
  const std::vector<double> r_grid{0.03, 0.06, 0.09};
  const RatioCurve a = pcf_ratio_nonparam(pat, fo, {0, 0}, {0, 1}, r_grid, 0.012);
  FirstOrder fo2 = fo;
  fo2.beta.col(0).array() += 1.3;  // scales every f by the same constant
  const RatioCurve b = pcf_ratio_nonparam(pat, fo2, {0, 0}, {0, 1}, r_grid, 0.012);
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    CHECK(a.missing[k] == b.missing[k]);
    if (!a.missing[k]) CHECK(a.value[k] == doctest::Approx(b.value[k]).epsilon(1e-10));
  }
}

TEST_CASE("integrated squared error: exact cases") {
  Theta truth = Theta::zeros(2, 1);
  truth.alpha << 0.5, -0.5;
  truth.xi << 0.03;
  truth.sigma2 << 0.4, 0.4;
  truth.phi << 0.03, 0.03;

  std::vector<double> grid;
  for (double r = 0.01; r <= 0.1001; r += 0.005) grid.push_back(r);

  // exact curves: zero error in every scope
  PcfCurveSet exact;
  exact.r = grid;
  exact.g.assign(2, std::vector<std::vector<double>>(2));
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      exact.g[i][j].resize(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k)
        exact.g[i][j][k] = cross_pcf(truth, i, j, grid[k]);
    }
  CHECK(mise({exact}, truth, MiseScope::Total) == doctest::Approx(0.0));

  // constant offset h on every curve: integral of h^2 over [0.01, 0.1] per
  // curve; within has two curves, between one
  const double h = 0.2;
  PcfCurveSet off = exact;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j)
      for (double& v : off.g[i][j]) v += h;
  const double per_curve = h * h * 0.09;
  CHECK(mise({off}, truth, MiseScope::Within) == doctest::Approx(2.0 * per_curve).epsilon(1e-12));
  CHECK(mise({off}, truth, MiseScope::Between) == doctest::Approx(per_curve).epsilon(1e-12));
  CHECK(mise({off}, truth, MiseScope::Total) ==
        doctest::Approx(mise({off}, truth, MiseScope::Within) +
                        mise({off}, truth, MiseScope::Between)).epsilon(1e-12));

  // replicate average
  CHECK(mise({exact, off}, truth, MiseScope::Between) ==
        doctest::Approx(0.5 * per_curve).epsilon(1e-12));
}

TEST_CASE("envelope test: duality of p-value and band containment") {
  // a well-specified model on its own simulation: run a few small tests and
  // check the exact relation p > level  <=>  data curve inside the band
  const Window w{0, 0, 1, 1};
  Theta t = Theta::zeros(2, 1);
  t.alpha << 0.5, -0.5;
  t.xi << 0.03;
  t.sigma2 << 0.3, 0.3;
  t.phi << 0.03, 0.03;
  SimulationSpec spec;
  spec.rho0.window = w;
  spec.rho0.nx = spec.rho0.ny = 64;
  spec.rho0.values.assign(64 * 64, 250.0);
  spec.gamma = Eigen::MatrixXd::Zero(2, 1);
  spec.theta = t;

  std::vector<double> r_grid{0.02, 0.04, 0.06, 0.08};
  const std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> ratios{
      {{0, 0}, {0, 1}}, {{1, 1}, {0, 1}}};

  for (int rep = 0; rep < 4; ++rep) {
    spec.rng_seed = 7000 + rep;
    const PointPattern pat = simulate_mlgcp(spec);
    const FirstOrderFit fo = estimate_beta(pat, {}, 0);
    const ScalarField rho0 = estimate_rho0(pat, fo.first_order, 0.08, 64, 64);
    const EnvelopeResult env = envelope_test(pat, fo.first_order, t, rho0, ratios,
                                             39, r_grid, 0.05, 5000 + rep, 0.012);
    CHECK(env.p_value >= 0.0);
    CHECK(env.p_value <= 1.0);
    CHECK(env.inside == (env.p_value > 0.05));
    CHECK(env.data_curve.size() == ratios.size());
    for (std::size_t c = 0; c < env.data_curve.size(); ++c) {
      REQUIRE(env.lo[c].size() == r_grid.size());
      for (std::size_t k = 0; k < r_grid.size(); ++k)
        CHECK(env.lo[c][k] <= env.hi[c][k]);
    }
    // duality spelled out: inside the band everywhere iff rank >= k_alpha
    bool contained = true;
    for (std::size_t c = 0; c < env.data_curve.size(); ++c)
      for (std::size_t k = 0; k < r_grid.size(); ++k)
        if (env.data_curve[c][k] < env.lo[c][k] || env.data_curve[c][k] > env.hi[c][k])
          contained = false;
    CHECK(env.inside == contained);
    CHECK(contained == (env.data_rank >= env.k_alpha));
  }
}

TEST_CASE("envelope test rejects an insufficient simulation count") {
  const Window w{0, 0, 1, 1};
  Theta t = Theta::zeros(2, 0);
  t.sigma2.setConstant(0.2);
  t.phi.setConstant(0.03);
  SimulationSpec spec;
  spec.rho0.window = w;
  spec.rho0.nx = spec.rho0.ny = 32;
  spec.rho0.values.assign(32 * 32, 150.0);
  spec.gamma = Eigen::MatrixXd::Zero(2, 1);
  spec.theta = t;
  spec.rng_seed = 1;
  const PointPattern pat = simulate_mlgcp(spec);
  const FirstOrder fo = FirstOrder::uniform(2);
  const ScalarField rho0 = estimate_rho0(pat, fo, 0.08, 32, 32);
  // level 0.05 needs at least 39 simulations; 19 must throw
  CHECK_THROWS(envelope_test(pat, fo, t, rho0, {{{0, 0}, {0, 1}}}, 19,
                             {0.03, 0.06}, 0.05, 2, 0.012));
}
