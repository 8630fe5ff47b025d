#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mlgcp/lgcp.hpp"

namespace mlgcp {

// edge-corrected Gaussian kernel intensity estimate over all points of the
// pattern; the correction divides each point's kernel by its in-window mass,
// so the estimate integrates to n up to quadrature error
ScalarField kernel_intensity(const PointPattern& pattern, double b, int nx, int ny);

// semi-parametric background intensity: per-type contributions reweighted by
// exp(-beta_i' z) and averaged over types
ScalarField estimate_rho0(const PointPattern& pattern, const FirstOrder& first_order,
                          double b, int nx, int ny);

// leave-one-type-out variant of estimate_rho0
ScalarField diggle_rho0_minus_i(const PointPattern& pattern,
                                const FirstOrder& first_order, double b,
                                int leave_out, int nx, int ny);

struct BandwidthSelection {
  double b_star = 0.0;
  double omega = 0.0;  // per-type area estimator at b_star
  double w = 0.0;      // pooled area estimator at b_star
  bool degenerate = false;            // criterion identically zero (p = 1)
  std::vector<double> skipped;        // grid values skipped (zero intensity at a point)
};

// pick the bandwidth whose two window-area estimators agree best
BandwidthSelection select_bandwidth(const PointPattern& pattern,
                                    const FirstOrder& first_order,
                                    const std::vector<double>& b_grid, int nx, int ny);

// translation-corrected kernel estimate of g_ij on an r grid, given intensity
// fields for each type
std::vector<double> nonparam_pcf(const PointPattern& pattern,
                                 const std::vector<ScalarField>& intensities, int i,
                                 int j, const std::vector<double>& r_grid,
                                 double pcf_bandwidth);

struct RatioCurve {
  std::vector<double> r;
  std::vector<double> value;
  std::vector<bool> missing;  // denominator had no mass near this r
};

// ratio g_ij / g_lk from kernel regression of pair-type indicators on pair
// distance, reweighted by the first-order factors; pcf_bandwidth <= 0 selects
// a Silverman-style rule on the pooled pair distances
RatioCurve pcf_ratio_nonparam(const PointPattern& pattern,
                              const FirstOrder& first_order,
                              std::pair<int, int> numerator,
                              std::pair<int, int> denominator,
                              const std::vector<double>& r_grid,
                              double pcf_bandwidth);

// one replicate's estimated PCF curves: g[i][j] on grid r, filled for i <= j
struct PcfCurveSet {
  std::vector<double> r;
  std::vector<std::vector<std::vector<double>>> g;
};

enum class MiseScope { Within, Between, Total };

// Monte Carlo mean over replicates of the trapezoid integral over
// r in [0.01, 0.1] of the squared curve errors against the model-implied PCFs
double mise(const std::vector<PcfCurveSet>& replicates, const Theta& truth,
            MiseScope scope);

struct EnvelopeResult {
  double p_value = 1.0;
  std::vector<double> r_grid;
  // per ratio pair: data difference curve and the envelope band
  std::vector<std::vector<double>> data_curve, lo, hi;
  int data_rank = 0;
  int k_alpha = 0;
  bool inside = false;  // data curve within the band at every grid point
};

// extreme-rank global envelope test of the fitted second-order structure:
// the statistic is (model-implied ratio minus non-parametric ratio) on the r
// grid, concatenated over the requested ratio pairs
EnvelopeResult envelope_test(
    const PointPattern& data, const FirstOrder& first_order, const Theta& theta,
    const ScalarField& rho0_hat,
    const std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>>& ratio_pairs,
    int n_sim, const std::vector<double>& r_grid, double level,
    std::uint64_t rng_seed, double pcf_bandwidth = -1.0);

}  // namespace mlgcp
