#include "dwell/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace dwell {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

namespace detail {
// Shared by every FFTW-planning site in the library.
std::mutex& fft_plan_mutex() { return plan_mutex(); }
}  // namespace detail

// ---------------------------------------------------------------- RowFft

RowFft::RowFft(int rows, int n) : rows_(rows), n_(n) {
  if (rows <= 0 || n <= 0) throw std::invalid_argument("RowFft: bad shape");
  rbuf_ = fftw_alloc_real(static_cast<size_t>(rows) * n);
  cbuf_ = reinterpret_cast<cplx*>(fftw_alloc_complex(static_cast<size_t>(rows) * (n / 2 + 1)));
  std::lock_guard<std::mutex> lock(plan_mutex());
  int dims[1] = {n};
  plan_fwd_ = fftw_plan_many_dft_r2c(1, dims, rows, rbuf_, nullptr, 1, n,
                                     reinterpret_cast<fftw_complex*>(cbuf_), nullptr, 1, n / 2 + 1,
                                     FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_many_dft_c2r(1, dims, rows, reinterpret_cast<fftw_complex*>(cbuf_), nullptr,
                                     1, n / 2 + 1, rbuf_, nullptr, 1, n, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("RowFft: planning failed");
}

RowFft::~RowFft() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void RowFft::forward(const double* in, cplx* out) const {
  std::memcpy(rbuf_, in, sizeof(double) * static_cast<size_t>(rows_) * n_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rbuf_,
                       reinterpret_cast<fftw_complex*>(cbuf_));
  std::memcpy(out, cbuf_, sizeof(cplx) * static_cast<size_t>(rows_) * spec_n());
}

void RowFft::backward(cplx* in, double* out) const {
  std::memcpy(cbuf_, in, sizeof(cplx) * static_cast<size_t>(rows_) * spec_n());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                       reinterpret_cast<fftw_complex*>(cbuf_), rbuf_);
  std::memcpy(out, rbuf_, sizeof(double) * static_cast<size_t>(rows_) * n_);
}

// ---------------------------------------------------------------- ColFft

ColFft::ColFft(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("ColFft: bad shape");
  rbuf_ = fftw_alloc_real(static_cast<size_t>(rows) * cols);
  cbuf_ = reinterpret_cast<cplx*>(fftw_alloc_complex(static_cast<size_t>(rows / 2 + 1) * cols));
  std::lock_guard<std::mutex> lock(plan_mutex());
  int dims[1] = {rows};
  plan_fwd_ = fftw_plan_many_dft_r2c(1, dims, cols, rbuf_, nullptr, cols, 1,
                                     reinterpret_cast<fftw_complex*>(cbuf_), nullptr, cols, 1,
                                     FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_many_dft_c2r(1, dims, cols, reinterpret_cast<fftw_complex*>(cbuf_), nullptr,
                                     cols, 1, rbuf_, nullptr, cols, 1, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("ColFft: planning failed");
}

ColFft::~ColFft() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void ColFft::forward(const double* in, cplx* out) const {
  std::memcpy(rbuf_, in, sizeof(double) * static_cast<size_t>(rows_) * cols_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rbuf_,
                       reinterpret_cast<fftw_complex*>(cbuf_));
  std::memcpy(out, cbuf_, sizeof(cplx) * static_cast<size_t>(spec_rows()) * cols_);
}

void ColFft::backward(cplx* in, double* out) const {
  std::memcpy(cbuf_, in, sizeof(cplx) * static_cast<size_t>(spec_rows()) * cols_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                       reinterpret_cast<fftw_complex*>(cbuf_), rbuf_);
  std::memcpy(out, rbuf_, sizeof(double) * static_cast<size_t>(rows_) * cols_);
}

// ----------------------------------------------------------------- Fft1d

Fft1d::Fft1d(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("Fft1d: bad length");
  ibuf_ = reinterpret_cast<cplx*>(fftw_alloc_complex(n));
  obuf_ = reinterpret_cast<cplx*>(fftw_alloc_complex(n));
  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_fwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(ibuf_),
                               reinterpret_cast<fftw_complex*>(obuf_), FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(ibuf_),
                               reinterpret_cast<fftw_complex*>(obuf_), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("Fft1d: planning failed");
}

Fft1d::~Fft1d() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(ibuf_);
  fftw_free(obuf_);
}

void Fft1d::forward(const cplx* in, cplx* out) const {
  std::memcpy(ibuf_, in, sizeof(cplx) * n_);
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), reinterpret_cast<fftw_complex*>(ibuf_),
                   reinterpret_cast<fftw_complex*>(obuf_));
  std::memcpy(out, obuf_, sizeof(cplx) * n_);
}

void Fft1d::backward(const cplx* in, cplx* out) const {
  std::memcpy(ibuf_, in, sizeof(cplx) * n_);
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), reinterpret_cast<fftw_complex*>(ibuf_),
                   reinterpret_cast<fftw_complex*>(obuf_));
  std::memcpy(out, obuf_, sizeof(cplx) * n_);
}

// -------------------------------------------------------------- Fft2dR2c

Fft2dR2c::Fft2dR2c(int rows, int cols) : rows_(rows), cols_(cols) {
  rbuf_ = fftw_alloc_real(static_cast<size_t>(rows) * cols);
  cbuf_ = reinterpret_cast<cplx*>(fftw_alloc_complex(static_cast<size_t>(rows) * (cols / 2 + 1)));
  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_ = fftw_plan_dft_r2c_2d(rows, cols, rbuf_, reinterpret_cast<fftw_complex*>(cbuf_),
                               FFTW_ESTIMATE);
  if (!plan_) throw std::runtime_error("Fft2dR2c: planning failed");
}

Fft2dR2c::~Fft2dR2c() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void Fft2dR2c::forward(const double* in, cplx* out) const {
  std::memcpy(rbuf_, in, sizeof(double) * static_cast<size_t>(rows_) * cols_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), rbuf_,
                       reinterpret_cast<fftw_complex*>(cbuf_));
  std::memcpy(out, cbuf_, sizeof(cplx) * static_cast<size_t>(rows_) * (cols_ / 2 + 1));
}

}  // namespace dwell
