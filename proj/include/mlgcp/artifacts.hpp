#pragma once

#include <string>
#include <vector>

#include "mlgcp/model_selection.hpp"
#include "mlgcp/nonparametrics.hpp"
#include "mlgcp/optimizer.hpp"

namespace mlgcp {

// fit artifact: theta, first-order contrasts, objective trace, and flags
void write_fit_json(const std::string& path, const FitResult& fit,
                    const FirstOrder& first_order);
// reads back what write_fit_json wrote (covariate rasters are not embedded;
// supply them separately if needed)
std::pair<FitResult, FirstOrder> read_fit_json(const std::string& path);

// flat (i, j, r, g) curve table; type indices are written 1-based
void write_curves_csv(const std::string& path, const std::vector<PcfCurvePoint>& curves);

void write_cv_json(const std::string& path, const CVResult& cv);
// (q, lambda, mean, se) rows for plotting
void write_cv_csv(const std::string& path, const CVResult& cv);

void write_envelope_json(const std::string& path, const EnvelopeResult& env,
                         const std::vector<std::pair<std::pair<int, int>,
                                                     std::pair<int, int>>>& ratio_pairs);

// generic curve CSV: r, value and optional per-row lo/hi band columns
void write_curve_csv(const std::string& path, const std::vector<double>& r,
                     const std::vector<double>& value,
                     const std::vector<double>* lo = nullptr,
                     const std::vector<double>* hi = nullptr);

// FNV-1a of a file's bytes, as a hex string; used for manifest config hashes
std::string file_hash_hex(const std::string& path);

}  // namespace mlgcp
