// fft.hpp — thin RAII wrappers over FFTW batched transforms.
//
// All planning goes through a global mutex (FFTW planning is not
// thread-safe); execution on distinct plan/buffer pairs is. Plans use
// FFTW_ESTIMATE so that plan selection, and therefore output, is
// reproducible across runs.
#pragma once

#include <complex>
#include <vector>

namespace dwell {

using cplx = std::complex<double>;

// Batched real-to-complex / complex-to-real transform along the contiguous
// (innermost) dimension of a rows x n row-major array. Unnormalized:
// backward(forward(f)) = n * f.
class RowFft {
 public:
  RowFft(int rows, int n);
  ~RowFft();
  RowFft(const RowFft&) = delete;
  RowFft& operator=(const RowFft&) = delete;

  // out has rows x (n/2+1) complex entries, row-major.
  void forward(const double* in, cplx* out) const;
  // Destroys `in` (FFTW c2r); out has rows x n reals.
  void backward(cplx* in, double* out) const;

  int rows() const { return rows_; }
  int n() const { return n_; }
  int spec_n() const { return n_ / 2 + 1; }

 private:
  int rows_, n_;
  void* plan_fwd_;
  void* plan_bwd_;
  double* rbuf_;
  cplx* cbuf_;
};

// Batched r2c/c2r along the outer (strided) dimension of a rows x cols
// row-major array: `cols` transforms of length `rows`, stride `cols`.
// Spectral layout: (rows/2+1) x cols complex, same stride pattern.
class ColFft {
 public:
  ColFft(int rows, int cols);
  ~ColFft();
  ColFft(const ColFft&) = delete;
  ColFft& operator=(const ColFft&) = delete;

  void forward(const double* in, cplx* out) const;
  void backward(cplx* in, double* out) const;

  int spec_rows() const { return rows_ / 2 + 1; }

 private:
  int rows_, cols_;
  void* plan_fwd_;
  void* plan_bwd_;
  double* rbuf_;
  cplx* cbuf_;
};

// 1-D complex-to-complex transform of length n (wavefunctions).
// Unnormalized: backward(forward(f)) = n * f.
class Fft1d {
 public:
  explicit Fft1d(int n);
  ~Fft1d();
  Fft1d(const Fft1d&) = delete;
  Fft1d& operator=(const Fft1d&) = delete;

  void forward(const cplx* in, cplx* out) const;
  void backward(const cplx* in, cplx* out) const;
  int n() const { return n_; }

 private:
  int n_;
  void* plan_fwd_;
  void* plan_bwd_;
  cplx* ibuf_;
  cplx* obuf_;
};

// 2-D r2c of a rows x cols row-major real array; spectral layout
// rows x (cols/2+1), first index wrapped-signed, second nonnegative.
class Fft2dR2c {
 public:
  Fft2dR2c(int rows, int cols);
  ~Fft2dR2c();
  Fft2dR2c(const Fft2dR2c&) = delete;
  Fft2dR2c& operator=(const Fft2dR2c&) = delete;

  void forward(const double* in, cplx* out) const;

 private:
  int rows_, cols_;
  void* plan_;
  double* rbuf_;
  cplx* cbuf_;
};

}  // namespace dwell
