#pragma once

#include <complex>
#include <memory>

namespace kpline::fft {

using cplx = std::complex<double>;

// Thin wrappers over FFTW plans. Buffers are owned internally so callers may
// pass any (Eigen-allocated) storage. Plans are cached per shape and shared;
// none of this is safe to call concurrently from several threads.

// 2-D real-to-half-complex transform over a column-major nx-by-ny array
// (x contiguous). The half spectrum is (nx/2+1)-by-ny, also column-major.
class Plan2D {
 public:
  static std::shared_ptr<Plan2D> get(int nx, int ny);
  ~Plan2D();
  Plan2D(const Plan2D&) = delete;
  Plan2D& operator=(const Plan2D&) = delete;

  void forward(const double* in, cplx* out);  // unnormalised
  void inverse(const cplx* in, double* out);  // unnormalised

 private:
  Plan2D(int nx, int ny);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Batched 1-D transforms of length n over `howmany` contiguous columns.
class PlanLines {
 public:
  static std::shared_ptr<PlanLines> get(int n, int howmany);
  ~PlanLines();
  PlanLines(const PlanLines&) = delete;
  PlanLines& operator=(const PlanLines&) = delete;

  void forward(const double* in, cplx* out);
  void inverse(const cplx* in, double* out);

 private:
  PlanLines(int n, int howmany);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Complex 1-D transform of length n.
class PlanComplex {
 public:
  static std::shared_ptr<PlanComplex> get(int n);
  ~PlanComplex();
  PlanComplex(const PlanComplex&) = delete;
  PlanComplex& operator=(const PlanComplex&) = delete;

  void forward(const cplx* in, cplx* out);
  void inverse(const cplx* in, cplx* out);

 private:
  explicit PlanComplex(int n);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Sets the FFTW worker count for plans created afterwards; already cached
// plans are dropped so the next request re-plans.
void set_threads(int nthreads);

}  // namespace kpline::fft
