#include "mlgcp/nonparametrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mlgcp/first_order.hpp"
#include "mlgcp/rng.hpp"

namespace mlgcp {

namespace {

double gauss2(double dx, double dy, double b) {
  return std::exp(-(dx * dx + dy * dy) / (2.0 * b * b)) /
         (2.0 * std::numbers::pi * b * b);
}

double gauss1(double t, double h) {
  return std::exp(-t * t / (2.0 * h * h)) / (std::sqrt(2.0 * std::numbers::pi) * h);
}

// in-window kernel mass c_b(v) for each point, by quadrature on the same grid
// the estimate lives on (this makes the mass-preservation identity exact up to
// the quadrature itself)
std::vector<double> edge_masses(const PointPattern& pattern, double b, int nx, int ny) {
  const Window& W = pattern.window;
  const double dx = (W.x1 - W.x0) / nx, dy = (W.y1 - W.y0) / ny;
  const double cell_area = dx * dy;
  const int n = static_cast<int>(pattern.points.size());
  std::vector<double> c(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < n; ++v) {
    const Point& pt = pattern.points[v];
    double s = 0.0;
    for (int iy = 0; iy < ny; ++iy) {
      const double cy = W.y0 + (iy + 0.5) * dy;
      for (int ix = 0; ix < nx; ++ix) {
        const double cx = W.x0 + (ix + 0.5) * dx;
        s += gauss2(cx - pt.x, cy - pt.y, b);
      }
    }
    c[v] = s * cell_area;
  }
  return c;
}

// weighted edge-corrected kernel sum: sum_v w_v k_b(u - v) / c_b(v)
ScalarField weighted_kernel_field(const PointPattern& pattern,
                                  const std::vector<double>& weights, double b,
                                  int nx, int ny) {
  if (!(b > 0.0)) throw std::invalid_argument("kernel estimate: bandwidth must be positive");
  const Window& W = pattern.window;
  const std::vector<double> c = edge_masses(pattern, b, nx, ny);
  ScalarField field;
  field.window = W;
  field.nx = nx;
  field.ny = ny;
  field.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  const double dx = (W.x1 - W.x0) / nx, dy = (W.y1 - W.y0) / ny;
  const int n = static_cast<int>(pattern.points.size());
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < ny; ++iy) {
    const double cy = W.y0 + (iy + 0.5) * dy;
    for (int ix = 0; ix < nx; ++ix) {
      const double cx = W.x0 + (ix + 0.5) * dx;
      double s = 0.0;
      for (int v = 0; v < n; ++v)
        s += weights[v] * gauss2(cx - pattern.points[v].x, cy - pattern.points[v].y, b) / c[v];
      field.values[static_cast<std::size_t>(iy) * nx + ix] = s;
    }
  }
  return field;
}

std::vector<double> rho0_weights(const PointPattern& pattern,
                                 const FirstOrder& first_order) {
  std::vector<double> w(pattern.points.size());
  for (std::size_t v = 0; v < pattern.points.size(); ++v) {
    const Point& pt = pattern.points[v];
    const Eigen::VectorXd z = first_order.covariate_vector(pt.x, pt.y);
    w[v] = std::exp(-first_order.log_f(pt.type, z));
  }
  return w;
}

double silverman(std::vector<double> d) {
  const std::size_t n = d.size();
  if (n < 2) return 0.01;
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  std::sort(d.begin(), d.end());
  const double iqr = d[(3 * n) / 4] - d[n / 4];
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = sd > 0.0 ? sd : 0.01;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace

ScalarField kernel_intensity(const PointPattern& pattern, double b, int nx, int ny) {
  return weighted_kernel_field(pattern, std::vector<double>(pattern.points.size(), 1.0),
                               b, nx, ny);
}

ScalarField estimate_rho0(const PointPattern& pattern, const FirstOrder& first_order,
                          double b, int nx, int ny) {
  const int p = pattern.n_types;
  ScalarField field = weighted_kernel_field(pattern, rho0_weights(pattern, first_order),
                                            b, nx, ny);
  for (double& v : field.values) v /= p;
  return field;
}

ScalarField diggle_rho0_minus_i(const PointPattern& pattern,
                                const FirstOrder& first_order, double b,
                                int leave_out, int nx, int ny) {
  const int p = pattern.n_types;
  if (p < 2) throw std::invalid_argument("diggle_rho0_minus_i: needs at least two types");
  if (leave_out < 0 || leave_out >= p)
    throw std::invalid_argument("diggle_rho0_minus_i: type index out of range");
  std::vector<double> w = rho0_weights(pattern, first_order);
  for (std::size_t v = 0; v < pattern.points.size(); ++v)
    if (pattern.points[v].type == leave_out) w[v] = 0.0;
  ScalarField field = weighted_kernel_field(pattern, w, b, nx, ny);
  for (double& v : field.values) v /= (p - 1);
  return field;
}

BandwidthSelection select_bandwidth(const PointPattern& pattern,
                                    const FirstOrder& first_order,
                                    const std::vector<double>& b_grid, int nx, int ny) {
  if (b_grid.empty()) throw std::invalid_argument("select_bandwidth: empty grid");
  const int p = pattern.n_types;
  BandwidthSelection sel;
  double best_crit = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double b : b_grid) {
    const ScalarField rho0 = estimate_rho0(pattern, first_order, b, nx, ny);
    double omega = 0.0, w = 0.0;
    bool skip = false;
    for (const Point& pt : pattern.points) {
      const double r0 = rho0.value_at(pt.x, pt.y);
      if (!(r0 > 0.0)) { skip = true; break; }
      const Eigen::VectorXd z = first_order.covariate_vector(pt.x, pt.y);
      omega += 1.0 / (r0 * std::exp(first_order.log_f(pt.type, z)));
      double pooled = 0.0;
      for (int k = 0; k < p; ++k) pooled += std::exp(first_order.log_f(k, z));
      w += 1.0 / (r0 * pooled);
    }
    if (skip) { sel.skipped.push_back(b); continue; }
    omega /= p;
    const double crit = (omega - w) * (omega - w);
    if (!any || crit < best_crit) {
      any = true;
      best_crit = crit;
      sel.b_star = b;
      sel.omega = omega;
      sel.w = w;
    }
  }
  if (!any) throw std::runtime_error("select_bandwidth: every bandwidth was skipped");
  if (p == 1) sel.degenerate = true;  // the two area estimators coincide
  return sel;
}

std::vector<double> nonparam_pcf(const PointPattern& pattern,
                                 const std::vector<ScalarField>& intensities, int i,
                                 int j, const std::vector<double>& r_grid,
                                 double pcf_bandwidth) {
  const double h = pcf_bandwidth;
  if (!(h > 0.0)) throw std::invalid_argument("nonparam_pcf: bandwidth must be positive");
  for (double r : r_grid)
    if (!(r > 0.0)) throw std::invalid_argument("nonparam_pcf: r grid must be positive");
  if (static_cast<int>(intensities.size()) != pattern.n_types)
    throw std::invalid_argument("nonparam_pcf: one intensity field per type required");

  const Window& W = pattern.window;
  const double Lx = W.x1 - W.x0, Ly = W.y1 - W.y0;
  double r_max = 0.0;
  for (double r : r_grid) r_max = std::max(r_max, r);
  const double reach = r_max + 5.0 * h;

  std::vector<int> A, B;
  for (int a = 0; a < static_cast<int>(pattern.points.size()); ++a) {
    if (pattern.points[a].type == i) A.push_back(a);
    if (pattern.points[a].type == j) B.push_back(a);
  }

  std::vector<double> g(r_grid.size(), 0.0);
  for (int a : A) {
    const Point& u = pattern.points[a];
    const double rho_u = intensities[i].value_at(u.x, u.y);
    for (int b : B) {
      if (b == a) continue;  // same-type case excludes the identical point
      const Point& v = pattern.points[b];
      const double dx = u.x - v.x, dy = u.y - v.y;
      const double d = std::hypot(dx, dy);
      if (d > reach) continue;
      const double rho_v = intensities[j].value_at(v.x, v.y);
      if (!(rho_u > 0.0) || !(rho_v > 0.0))
        throw std::invalid_argument("nonparam_pcf: intensity not positive at a data point");
      const double trans = (Lx - std::abs(dx)) * (Ly - std::abs(dy));
      const double base = rho_u * rho_v * trans;
      for (std::size_t gi = 0; gi < r_grid.size(); ++gi)
        g[gi] += gauss1(r_grid[gi] - d, h) /
                 (2.0 * std::numbers::pi * r_grid[gi] * base);
    }
  }
  return g;
}

RatioCurve pcf_ratio_nonparam(const PointPattern& pattern,
                              const FirstOrder& first_order,
                              std::pair<int, int> numerator,
                              std::pair<int, int> denominator,
                              const std::vector<double>& r_grid,
                              double pcf_bandwidth) {
  for (double r : r_grid)
    if (!(r > 0.0)) throw std::invalid_argument("pcf_ratio_nonparam: r grid must be positive");
  double r_max = 0.0;
  for (double r : r_grid) r_max = std::max(r_max, r);

  double h = pcf_bandwidth;
  PairIndex pairs = enumerate_pairs(pattern, h > 0.0 ? r_max + 5.0 * h : 2.0 * r_max);
  if (!(h > 0.0)) {
    std::vector<double> d;
    d.reserve(pairs.entries.size());
    for (const PairEntry& e : pairs.entries) d.push_back(e.r);
    h = silverman(std::move(d));
  }

  // per-point first-order factors
  std::vector<double> f(pattern.points.size());
  for (std::size_t v = 0; v < pattern.points.size(); ++v) {
    const Point& pt = pattern.points[v];
    f[v] = std::exp(first_order.log_f(pt.type, first_order.covariate_vector(pt.x, pt.y)));
  }

  RatioCurve out;
  out.r = r_grid;
  out.value.assign(r_grid.size(), std::numeric_limits<double>::quiet_NaN());
  out.missing.assign(r_grid.size(), true);
  std::vector<double> num(r_grid.size(), 0.0), den(r_grid.size(), 0.0);
  const double reach = r_max + 5.0 * h;
  for (const PairEntry& e : pairs.entries) {
    if (e.r > reach) continue;
    const bool is_num = e.ti == numerator.first && e.tj == numerator.second;
    const bool is_den = e.ti == denominator.first && e.tj == denominator.second;
    if (!is_num && !is_den) continue;
    const double w = 1.0 / (f[e.u] * f[e.v]);
    for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
      const double kh = gauss1(r_grid[gi] - e.r, h) * w;
      if (is_num) num[gi] += kh;
      if (is_den) den[gi] += kh;
    }
  }
  for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
    if (den[gi] > 0.0) {
      out.value[gi] = num[gi] / den[gi];
      out.missing[gi] = false;
    }
  }
  return out;
}

double mise(const std::vector<PcfCurveSet>& replicates, const Theta& truth,
            MiseScope scope) {
  if (replicates.empty()) throw std::invalid_argument("mise: need at least one replicate");
  const int p = truth.n_types();
  double total = 0.0;
  for (const PcfCurveSet& rep : replicates) {
    const std::vector<double>& r = rep.r;
    for (int i = 0; i < p; ++i) {
      for (int j = i; j < p; ++j) {
        if (scope == MiseScope::Within && i != j) continue;
        if (scope == MiseScope::Between && i == j) continue;
        const std::vector<double>& est = rep.g[i][j];
        double integral = 0.0;
        for (std::size_t gi = 0; gi + 1 < r.size(); ++gi) {
          const double a = r[gi], b = r[gi + 1];
          if (a < 0.01 - 1e-12 || b > 0.1 + 1e-12) continue;
          const double ea = est[gi] - cross_pcf(truth, i, j, a);
          const double eb = est[gi + 1] - cross_pcf(truth, i, j, b);
          integral += 0.5 * (ea * ea + eb * eb) * (b - a);
        }
        total += integral;
      }
    }
  }
  return total / static_cast<double>(replicates.size());
}

EnvelopeResult envelope_test(
    const PointPattern& data, const FirstOrder& first_order, const Theta& theta,
    const ScalarField& rho0_hat,
    const std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>>& ratio_pairs,
    int n_sim, const std::vector<double>& r_grid, double level,
    std::uint64_t rng_seed, double pcf_bandwidth) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("envelope_test: level must be in (0, 1)");
  if (n_sim + 1 < static_cast<int>(std::ceil(2.0 / level)))
    throw std::invalid_argument("envelope_test: too few simulations for the requested level");
  if (ratio_pairs.empty() || r_grid.empty())
    throw std::invalid_argument("envelope_test: ratio pairs and r grid must be non-empty");

  const std::size_t n_pairs = ratio_pairs.size();
  const std::size_t width = n_pairs * r_grid.size();

  // model-implied ratio curves at the fitted parameters
  std::vector<double> model_curve(width);
  for (std::size_t pi = 0; pi < n_pairs; ++pi) {
    const auto& [num, den] = ratio_pairs[pi];
    for (std::size_t gi = 0; gi < r_grid.size(); ++gi)
      model_curve[pi * r_grid.size() + gi] =
          cross_pcf(theta, num.first, num.second, r_grid[gi]) /
          cross_pcf(theta, den.first, den.second, r_grid[gi]);
  }

  auto statistic = [&](const PointPattern& pattern, const FirstOrder& fo) {
    std::vector<double> t(width, 0.0);
    for (std::size_t pi = 0; pi < n_pairs; ++pi) {
      const RatioCurve rc = pcf_ratio_nonparam(pattern, fo, ratio_pairs[pi].first,
                                               ratio_pairs[pi].second, r_grid,
                                               pcf_bandwidth);
      for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
        const std::size_t at = pi * r_grid.size() + gi;
        t[at] = rc.missing[gi] ? 0.0 : model_curve[at] - rc.value[gi];
      }
    }
    return t;
  };

  const int total = n_sim + 1;
  std::vector<std::vector<double>> curves(total);
  curves[0] = statistic(data, first_order);

  SimulationSpec spec;
  spec.rho0 = rho0_hat;
  spec.gamma = first_order.beta;
  spec.covariates = first_order.covariates;
  spec.theta = theta;
  spec.field_family = CorrFamily::Exponential;
#pragma omp parallel for schedule(dynamic)
  for (int rep = 1; rep <= n_sim; ++rep) {
    SimulationSpec s = spec;
    s.rng_seed = derive_seed(rng_seed, rep);
    const PointPattern sim = simulate_mlgcp(s);
    // refit the first-order contrasts on each replicate: reusing the data's
    // fit would center the observed curve relative to the simulated ones and
    // make the test conservative
    const FirstOrder sim_fo =
        estimate_beta(sim, first_order.covariates, 0).first_order;
    curves[rep] = statistic(sim, sim_fo);
  }

  // pointwise two-sided depths per coordinate; sorting each curve's depth
  // vector and ordering curves lexicographically breaks the heavy ties of the
  // plain minimum-depth statistic while keeping its extremeness ordering
  // (curves with a smaller minimum depth always sort first)
  std::vector<std::vector<int>> depth_vec(total, std::vector<int>(width));
  std::vector<double> column(total);
  for (std::size_t at = 0; at < width; ++at) {
    for (int j = 0; j < total; ++j) column[j] = curves[j][at];
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    for (int j = 0; j < total; ++j) {
      const auto lo = std::lower_bound(sorted.begin(), sorted.end(), column[j]);
      const auto hi = std::upper_bound(sorted.begin(), sorted.end(), column[j]);
      const int below = static_cast<int>(hi - sorted.begin());         // # <= value
      const int above = total - static_cast<int>(lo - sorted.begin()); // # >= value
      depth_vec[j][at] = std::min(below, above);
    }
  }
  for (int j = 0; j < total; ++j) std::sort(depth_vec[j].begin(), depth_vec[j].end());

  // position of each curve in the extremeness order, counting lexicographic
  // ties as equal: e_j = #{m : depth_vec[m] <= depth_vec[j]}
  std::vector<int> order_count(total, 0);
  for (int j = 0; j < total; ++j)
    for (int m = 0; m < total; ++m)
      if (depth_vec[m] <= depth_vec[j]) ++order_count[j];

  EnvelopeResult result;
  result.r_grid = r_grid;
  result.data_rank = order_count[0];
  result.p_value = static_cast<double>(order_count[0]) / total;

  // envelope from the curves that are not among the level*(N+1) most extreme;
  // p > level  <=>  order_count[0] > k_alpha  <=>  data contributes to (and
  // hence lies inside) the band
  const int k_alpha = static_cast<int>(std::floor(level * total));
  result.k_alpha = k_alpha + 1;  // smallest kept order position

  result.data_curve.assign(n_pairs, std::vector<double>(r_grid.size()));
  result.lo.assign(n_pairs, std::vector<double>(r_grid.size(),
                                                std::numeric_limits<double>::infinity()));
  result.hi.assign(n_pairs, std::vector<double>(r_grid.size(),
                                                -std::numeric_limits<double>::infinity()));
  for (std::size_t pi = 0; pi < n_pairs; ++pi)
    for (std::size_t gi = 0; gi < r_grid.size(); ++gi)
      result.data_curve[pi][gi] = curves[0][pi * r_grid.size() + gi];
  for (int j = 0; j < total; ++j) {
    if (order_count[j] <= k_alpha) continue;
    for (std::size_t pi = 0; pi < n_pairs; ++pi)
      for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
        const double v = curves[j][pi * r_grid.size() + gi];
        auto& lo = result.lo[pi][gi];
        auto& hi = result.hi[pi][gi];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }

  result.inside = true;
  for (std::size_t pi = 0; pi < n_pairs && result.inside; ++pi)
    for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
      const double v = result.data_curve[pi][gi];
      if (v < result.lo[pi][gi] || v > result.hi[pi][gi]) { result.inside = false; break; }
    }
  return result;
}

}  // namespace mlgcp
