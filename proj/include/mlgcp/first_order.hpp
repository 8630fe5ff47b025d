#pragma once

#include <vector>

#include "mlgcp/lgcp.hpp"

namespace mlgcp {

struct FirstOrderFit {
  FirstOrder first_order;
  bool separation_detected = false;  // diverging contrasts capped by norm limit
  int iterations = 0;
};

// Contrast estimation relative to the baseline type. Without covariates this
// is the count log-ratio; with covariates the conditional multinomial
// likelihood over pooled points is maximized by Newton iterations, baseline
// row pinned to zero.
FirstOrderFit estimate_beta(const PointPattern& pattern,
                            const std::vector<ScalarField>& covariates, int baseline);

// Newton path regardless of covariate count; with no covariates this solves
// the intercept-only multinomial whose MLE is the count log-ratio.
FirstOrderFit estimate_beta_newton(const PointPattern& pattern,
                                   const std::vector<ScalarField>& covariates,
                                   int baseline);

}  // namespace mlgcp
