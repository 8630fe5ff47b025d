#include "mlgcp/gaussian_field.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <mutex>

#include "mlgcp/rng.hpp"

namespace mlgcp {

double CorrelationModel::operator()(double r) const {
  if (r < 0.0) throw std::invalid_argument("correlation: negative distance");
  if (!(scale > 0.0)) throw std::invalid_argument("correlation: scale must be positive");
  const double t = r / scale;
  return family == CorrFamily::Exponential ? std::exp(-t) : std::exp(-t * t);
}

double corr(const CorrelationModel& model, double r) { return model(r); }

namespace {
// FFTW planning is not thread-safe
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct GrfSampler::Impl {
  // circulant embedding state
  int M = 0, N = 0;
  std::vector<double> sqrt_lambda;  // size M*N, row-major (row = y index)
  fftw_plan plan = nullptr;
  fftw_complex* buf_in = nullptr;
  fftw_complex* buf_out = nullptr;

  // dense fallback state
  Eigen::MatrixXd chol_lower;

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    if (plan) fftw_destroy_plan(plan);
    if (buf_in) fftw_free(buf_in);
    if (buf_out) fftw_free(buf_out);
  }
};

GrfSampler::GrfSampler(Window window, int nx, int ny, CorrelationModel model)
    : impl_(std::make_unique<Impl>()), window_(window), nx_(nx), ny_(ny), model_(model) {
  window.validate();
  if (nx < 2 || ny < 2) throw std::invalid_argument("GrfSampler: grid must be >= 2x2");
  if (!(model.scale > 0.0)) throw std::invalid_argument("GrfSampler: scale must be positive");

  const double dx = window.width() / nx;
  const double dy = window.height() / ny;
  const double cell_diag = std::hypot(dx, dy);
  resolution_warning_ = !(cell_diag < model.scale / 2.0);

  // try circulant embedding with increasing padding
  for (int factor : {2, 3, 4, 6}) {
    const int M = factor * nx;
    const int N = factor * ny;
    std::vector<double> base(static_cast<std::size_t>(M) * N);
    for (int iy = 0; iy < N; ++iy) {
      const int wy = std::min(iy, N - iy);
      for (int ix = 0; ix < M; ++ix) {
        const int wx = std::min(ix, M - ix);
        base[static_cast<std::size_t>(iy) * M + ix] = model(std::hypot(wx * dx, wy * dy));
      }
    }
    // eigenvalues of the block-circulant matrix: 2D DFT of the base row
    std::vector<fftw_complex> in(base.size()), out(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      in[k][0] = base[k];
      in[k][1] = 0.0;
    }
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      fftw_plan p = fftw_plan_dft_2d(N, M, in.data(), out.data(), FFTW_FORWARD,
                                     FFTW_ESTIMATE);
      fftw_execute(p);
      fftw_destroy_plan(p);
    }
    double pos_mass = 0.0, neg_mass = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) {
      const double lam = out[k][0];
      if (lam > 0.0)
        pos_mass += lam;
      else
        neg_mass -= lam;
    }
    if (neg_mass <= 1e-8 * pos_mass) {
      impl_->M = M;
      impl_->N = N;
      impl_->sqrt_lambda.resize(base.size());
      for (std::size_t k = 0; k < base.size(); ++k)
        impl_->sqrt_lambda[k] = out[k][0] > 0.0 ? std::sqrt(out[k][0]) : 0.0;
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      impl_->buf_in = fftw_alloc_complex(base.size());
      impl_->buf_out = fftw_alloc_complex(base.size());
      impl_->plan = fftw_plan_dft_2d(N, M, impl_->buf_in, impl_->buf_out, FFTW_BACKWARD,
                                     FFTW_ESTIMATE);
      return;
    }
  }

  // dense Cholesky of the grid covariance with jitter
  const long n = static_cast<long>(nx) * ny;
  if (n > 4096)
    throw FieldSimulationError(
        "circulant embedding not non-negative definite and grid too large for the "
        "dense Cholesky fallback");
  use_cholesky_ = true;
  Eigen::MatrixXd cov(n, n);
  for (long a = 0; a < n; ++a) {
    const double ax = window.x0 + (a % nx + 0.5) * dx;
    const double ay = window.y0 + (a / nx + 0.5) * dy;
    for (long b = 0; b <= a; ++b) {
      const double bx = window.x0 + (b % nx + 0.5) * dx;
      const double by = window.y0 + (b / nx + 0.5) * dy;
      const double c = model(std::hypot(ax - bx, ay - by));
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  cov.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw FieldSimulationError("grid covariance not positive definite after jitter");
  impl_->chol_lower = llt.matrixL();
}

GrfSampler::~GrfSampler() = default;

ScalarField GrfSampler::sample(std::uint64_t seed) const {
  ScalarField field(window_, nx_, ny_);
  Rng rng(seed);

  if (use_cholesky_) {
    const long n = static_cast<long>(nx_) * ny_;
    Eigen::VectorXd z(n);
    for (long k = 0; k < n; ++k) z(k) = rng.normal();
    Eigen::VectorXd x = impl_->chol_lower * z;
    for (long k = 0; k < n; ++k) field.values[k] = x(k);
    return field;
  }

  const int M = impl_->M;
  const int N = impl_->N;
  const std::size_t total = static_cast<std::size_t>(M) * N;
  const double norm = 1.0 / std::sqrt(static_cast<double>(total));

  fftw_complex* in = fftw_alloc_complex(total);
  fftw_complex* out = fftw_alloc_complex(total);
  for (std::size_t k = 0; k < total; ++k) {
    const double s = impl_->sqrt_lambda[k] * norm;
    in[k][0] = s * rng.normal();
    in[k][1] = s * rng.normal();
  }
  // new-array execution is thread-safe; buffers come from fftw_malloc so the
  // alignment matches the planned arrays
  fftw_execute_dft(impl_->plan, in, out);
  for (int iy = 0; iy < ny_; ++iy)
    for (int ix = 0; ix < nx_; ++ix)
      field.at(ix, iy) = out[static_cast<std::size_t>(iy) * M + ix][0];
  fftw_free(in);
  fftw_free(out);
  return field;
}

ScalarField simulate_grf(Window window, int nx, int ny, const CorrelationModel& model,
                         std::uint64_t seed) {
  GrfSampler sampler(window, nx, ny, model);
  return sampler.sample(seed);
}

}  // namespace mlgcp
