#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mlgcp/geometry.hpp"

namespace mlgcp {

enum class CorrFamily { Exponential, Gaussian };

struct CorrelationModel {
  CorrFamily family = CorrFamily::Exponential;
  double scale = 0.1;

  double operator()(double r) const;
};

double corr(const CorrelationModel& model, double r);

class FieldSimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stationary zero-mean unit-variance Gaussian field sampler on the cell-center
// grid. Circulant embedding on a padded torus with FFT; if no padding yields a
// non-negative definite embedding, falls back to dense Cholesky with diagonal
// jitter (small grids) and otherwise reports failure.
class GrfSampler {
 public:
  GrfSampler(Window window, int nx, int ny, CorrelationModel model);
  ~GrfSampler();

  GrfSampler(const GrfSampler&) = delete;
  GrfSampler& operator=(const GrfSampler&) = delete;

  ScalarField sample(std::uint64_t seed) const;

  bool resolution_warning() const { return resolution_warning_; }
  bool used_cholesky_fallback() const { return use_cholesky_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Window window_;
  int nx_, ny_;
  CorrelationModel model_;
  bool resolution_warning_ = false;
  bool use_cholesky_ = false;
};

ScalarField simulate_grf(Window window, int nx, int ny, const CorrelationModel& model,
                         std::uint64_t seed);

}  // namespace mlgcp
