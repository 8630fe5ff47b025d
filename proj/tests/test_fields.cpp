#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlgcp/gaussian_field.hpp"
#include "mlgcp/rng.hpp"

using namespace mlgcp;

TEST_CASE("correlation values") {
  CorrelationModel expo{CorrFamily::Exponential, 0.05};
  CHECK(expo(0.0) == doctest::Approx(1.0));
  CHECK(expo(0.05) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CorrelationModel gauss{CorrFamily::Gaussian, 0.2};
  CHECK(gauss(0.2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS(expo(-0.1));
}

TEST_CASE("grf is bit-reproducible for a fixed seed") {
  const Window w{0, 0, 1, 1};
  CorrelationModel c{CorrFamily::Exponential, 0.1};
  const ScalarField a = simulate_grf(w, 48, 48, c, 123);
  const ScalarField b = simulate_grf(w, 48, 48, c, 123);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("grf moments over replicates") {
  // Monte Carlo over 500 replicates on a small grid: per-cell mean near 0,
  // variance in [0.85, 1.15], lag-scale correlation near exp(-1)
  const Window w{0, 0, 1, 1};
  const int n = 24, reps = 500;
  const double scale = 0.2;
  CorrelationModel c{CorrFamily::Exponential, scale};

  std::vector<double> sum(n * n, 0.0), sum2(n * n, 0.0);
  // average correlation between cell pairs exactly `lag` cells apart in x,
  // where lag*cell == scale
  const int lag = static_cast<int>(scale * n + 0.5);
  double corr_acc = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const ScalarField f = simulate_grf(w, n, n, c, 1000 + rep);
    for (int i = 0; i < n * n; ++i) {
      sum[i] += f.values[i];
      sum2[i] += f.values[i] * f.values[i];
    }
    double acc = 0.0;
    int cnt = 0;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix + lag < n; ++ix) {
        acc += f.values[iy * n + ix] * f.values[iy * n + ix + lag];
        ++cnt;
      }
    corr_acc += acc / cnt;
  }
  const double bound = 3.0 / std::sqrt(static_cast<double>(reps));
  int mean_fail = 0, var_fail = 0;
  for (int i = 0; i < n * n; ++i) {
    const double mean = sum[i] / reps;
    const double var = sum2[i] / reps - mean * mean;
    if (std::abs(mean) > bound) ++mean_fail;
    if (var < 0.85 || var > 1.15) ++var_fail;
  }
  // per-cell 3-sigma checks: allow a small number of statistical outliers
  CHECK(mean_fail <= 6);
  CHECK(var_fail <= 6);
  const double exact_corr = std::exp(-static_cast<double>(lag) / (scale * n));
  CHECK(corr_acc / reps == doctest::Approx(exact_corr).epsilon(0.05 / exact_corr));
}

TEST_CASE("gaussian family produces target lag correlation") {
  const Window w{0, 0, 1, 1};
  const int n = 24, reps = 400;
  CorrelationModel c{CorrFamily::Gaussian, 0.25};
  const int lag = 6;  // lag distance = 0.25 = scale -> corr exp(-1)
  double corr_acc = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const ScalarField f = simulate_grf(w, n, n, c, 77000 + rep);
    double acc = 0.0;
    int cnt = 0;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix + lag < n; ++ix) {
        acc += f.values[iy * n + ix] * f.values[iy * n + ix + lag];
        ++cnt;
      }
    corr_acc += acc / cnt;
  }
  CHECK(corr_acc / reps == doctest::Approx(std::exp(-1.0)).epsilon(0.15));
}

TEST_CASE("distinct seeds give distinct fields") {
  const Window w{0, 0, 1, 1};
  CorrelationModel c{CorrFamily::Exponential, 0.1};
  const ScalarField a = simulate_grf(w, 16, 16, c, 1);
  const ScalarField b = simulate_grf(w, 16, 16, c, 2);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (a.values[i] != b.values[i]) any_diff = true;
  CHECK(any_diff);
}
