#include "kpline/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace kpline::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int& thread_count() {
  static int n = 1;
  return n;
}

bool& threads_ready() {
  static bool ready = false;
  return ready;
}

void configure_planner() {
  if (!threads_ready()) {
    fftw_init_threads();
    threads_ready() = true;
  }
  fftw_plan_with_nthreads(thread_count());
}

std::map<std::pair<int, int>, std::shared_ptr<Plan2D>>& cache2d() {
  static std::map<std::pair<int, int>, std::shared_ptr<Plan2D>> c;
  return c;
}

std::map<std::pair<int, int>, std::shared_ptr<PlanLines>>& cache_lines() {
  static std::map<std::pair<int, int>, std::shared_ptr<PlanLines>> c;
  return c;
}

std::map<int, std::shared_ptr<PlanComplex>>& cache_complex() {
  static std::map<int, std::shared_ptr<PlanComplex>> c;
  return c;
}

}  // namespace

struct Plan2D::Impl {
  int nx, ny;
  std::size_t nreal, ncomplex;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

Plan2D::Plan2D(int nx, int ny) : impl_(std::make_unique<Impl>()) {
  auto& p = *impl_;
  p.nx = nx;
  p.ny = ny;
  p.nreal = static_cast<std::size_t>(nx) * ny;
  p.ncomplex = static_cast<std::size_t>(nx / 2 + 1) * ny;
  p.rbuf = fftw_alloc_real(p.nreal);
  p.cbuf = fftw_alloc_complex(p.ncomplex);
  if (!p.rbuf || !p.cbuf) throw std::bad_alloc();
  configure_planner();
  // FFTW is row-major: dims [ny][nx] put x last, matching column-major storage.
  p.fwd = fftw_plan_dft_r2c_2d(ny, nx, p.rbuf, p.cbuf, FFTW_ESTIMATE);
  p.inv = fftw_plan_dft_c2r_2d(ny, nx, p.cbuf, p.rbuf, FFTW_ESTIMATE);
  if (!p.fwd || !p.inv) throw std::runtime_error("fftw: 2-D planning failed");
}

Plan2D::~Plan2D() {
  auto& p = *impl_;
  if (p.fwd) fftw_destroy_plan(p.fwd);
  if (p.inv) fftw_destroy_plan(p.inv);
  fftw_free(p.rbuf);
  fftw_free(p.cbuf);
}

std::shared_ptr<Plan2D> Plan2D::get(int nx, int ny) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto& c = cache2d();
  auto it = c.find({nx, ny});
  if (it != c.end()) return it->second;
  std::shared_ptr<Plan2D> plan(new Plan2D(nx, ny));
  c.emplace(std::make_pair(nx, ny), plan);
  return plan;
}

void Plan2D::forward(const double* in, cplx* out) {
  auto& p = *impl_;
  std::memcpy(p.rbuf, in, p.nreal * sizeof(double));
  fftw_execute(p.fwd);
  std::memcpy(static_cast<void*>(out), p.cbuf, p.ncomplex * sizeof(fftw_complex));
}

void Plan2D::inverse(const cplx* in, double* out) {
  auto& p = *impl_;
  std::memcpy(p.cbuf, static_cast<const void*>(in), p.ncomplex * sizeof(fftw_complex));
  fftw_execute(p.inv);
  std::memcpy(out, p.rbuf, p.nreal * sizeof(double));
}

struct PlanLines::Impl {
  int n, howmany;
  std::size_t nreal, ncomplex;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

PlanLines::PlanLines(int n, int howmany) : impl_(std::make_unique<Impl>()) {
  auto& p = *impl_;
  p.n = n;
  p.howmany = howmany;
  const int nh = n / 2 + 1;
  p.nreal = static_cast<std::size_t>(n) * howmany;
  p.ncomplex = static_cast<std::size_t>(nh) * howmany;
  p.rbuf = fftw_alloc_real(p.nreal);
  p.cbuf = fftw_alloc_complex(p.ncomplex);
  if (!p.rbuf || !p.cbuf) throw std::bad_alloc();
  configure_planner();
  int dims[1] = {n};
  p.fwd = fftw_plan_many_dft_r2c(1, dims, howmany, p.rbuf, nullptr, 1, n, p.cbuf, nullptr, 1, nh,
                                 FFTW_ESTIMATE);
  p.inv = fftw_plan_many_dft_c2r(1, dims, howmany, p.cbuf, nullptr, 1, nh, p.rbuf, nullptr, 1, n,
                                 FFTW_ESTIMATE);
  if (!p.fwd || !p.inv) throw std::runtime_error("fftw: batched 1-D planning failed");
}

PlanLines::~PlanLines() {
  auto& p = *impl_;
  if (p.fwd) fftw_destroy_plan(p.fwd);
  if (p.inv) fftw_destroy_plan(p.inv);
  fftw_free(p.rbuf);
  fftw_free(p.cbuf);
}

std::shared_ptr<PlanLines> PlanLines::get(int n, int howmany) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto& c = cache_lines();
  auto it = c.find({n, howmany});
  if (it != c.end()) return it->second;
  std::shared_ptr<PlanLines> plan(new PlanLines(n, howmany));
  c.emplace(std::make_pair(n, howmany), plan);
  return plan;
}

void PlanLines::forward(const double* in, cplx* out) {
  auto& p = *impl_;
  std::memcpy(p.rbuf, in, p.nreal * sizeof(double));
  fftw_execute(p.fwd);
  std::memcpy(static_cast<void*>(out), p.cbuf, p.ncomplex * sizeof(fftw_complex));
}

void PlanLines::inverse(const cplx* in, double* out) {
  auto& p = *impl_;
  std::memcpy(p.cbuf, static_cast<const void*>(in), p.ncomplex * sizeof(fftw_complex));
  fftw_execute(p.inv);
  std::memcpy(out, p.rbuf, p.nreal * sizeof(double));
}

struct PlanComplex::Impl {
  int n;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

PlanComplex::PlanComplex(int n) : impl_(std::make_unique<Impl>()) {
  auto& p = *impl_;
  p.n = n;
  p.buf = fftw_alloc_complex(n);
  if (!p.buf) throw std::bad_alloc();
  configure_planner();
  p.fwd = fftw_plan_dft_1d(n, p.buf, p.buf, FFTW_FORWARD, FFTW_ESTIMATE);
  p.inv = fftw_plan_dft_1d(n, p.buf, p.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!p.fwd || !p.inv) throw std::runtime_error("fftw: complex 1-D planning failed");
}

PlanComplex::~PlanComplex() {
  auto& p = *impl_;
  if (p.fwd) fftw_destroy_plan(p.fwd);
  if (p.inv) fftw_destroy_plan(p.inv);
  fftw_free(p.buf);
}

std::shared_ptr<PlanComplex> PlanComplex::get(int n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto& c = cache_complex();
  auto it = c.find(n);
  if (it != c.end()) return it->second;
  std::shared_ptr<PlanComplex> plan(new PlanComplex(n));
  c.emplace(n, plan);
  return plan;
}

void PlanComplex::forward(const cplx* in, cplx* out) {
  auto& p = *impl_;
  std::memcpy(p.buf, static_cast<const void*>(in), p.n * sizeof(fftw_complex));
  fftw_execute(p.fwd);
  std::memcpy(static_cast<void*>(out), p.buf, p.n * sizeof(fftw_complex));
}

void PlanComplex::inverse(const cplx* in, cplx* out) {
  auto& p = *impl_;
  std::memcpy(p.buf, static_cast<const void*>(in), p.n * sizeof(fftw_complex));
  fftw_execute(p.inv);
  std::memcpy(static_cast<void*>(out), p.buf, p.n * sizeof(fftw_complex));
}

void set_threads(int nthreads) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  thread_count() = nthreads < 1 ? 1 : nthreads;
  cache2d().clear();
  cache_lines().clear();
  cache_complex().clear();
}

}  // namespace kpline::fft
