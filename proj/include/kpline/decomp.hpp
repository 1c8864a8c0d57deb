#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpline/grid.hpp"

namespace kpline {

// Band-limited real profiles on the y-grid of a Grid2D. A profile is stored by
// its samples; the band coordinates are [Re f_0, Re f_1, Im f_1, ..., Re f_M, Im f_M]
// with f_m = (1/ny) sum_j f(y_j) exp(-i eta_m y_j) and |eta_m| <= eta0.
class YBand {
 public:
  YBand(const Grid2D& grid, double eta0);

  int ny() const { return ny_; }
  double dy() const { return dy_; }
  double eta0() const { return eta0_; }
  int highest() const { return static_cast<int>(etas_.size()) - 1; }  // M
  int dimension() const { return 2 * highest() + 1; }
  const std::vector<double>& etas() const { return etas_; }
  const Eigen::ArrayXd& ys() const { return ys_; }

  const Eigen::ArrayXd& basis(int l) const { return basis_[l]; }
  Eigen::ArrayXd synthesize(const Eigen::VectorXd& coords) const;
  Eigen::VectorXd analyze(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd project(const Eigen::ArrayXd& f) const { return synthesize(analyze(f)); }
  // Relative size of the out-of-band part of f.
  double leakage(const Eigen::ArrayXd& f) const;
  // Spectral y-derivative of a band-limited profile.
  Eigen::ArrayXd derivative(const Eigen::ArrayXd& f, int order = 1) const;

 private:
  int ny_;
  double dy_, eta0_;
  Eigen::ArrayXd ys_;
  std::vector<double> etas_;
  std::vector<Eigen::ArrayXd> basis_;
};

// Local amplitude c(y) and lab-frame crest phase x(y) at time t.
struct ModulationState {
  Eigen::ArrayXd c;
  Eigen::ArrayXd x;
  double t = 0.0;
};

struct DecompositionOptions {
  double eta0 = 0.25;
  double offset_L = 20.0;
  double soliton_speed = 4.0;   // speed of the reference frame z = x - 4t
  double frame_speed = 4.0;     // speed of the grid the snapshots live on
  double tolerance = 1e-10;
  int max_iterations = 50;
  int max_halvings = 6;
  double max_condition = 1e8;
  double fd_step = 1e-6;
  double alpha = 0.5;
  // Smallness threshold on ||u_tilde||_X / sqrt(ly), with u_tilde measured
  // against the warm-start crest.
  double delta0 = 0.3;
  double x_front = 5.0;         // front of the X-norm window ahead of the crest
  // Pairings are taken over the crest-frame window [-lx/2 + seam_width, pairing_front]
  // with smooth tapers of width seam_width at both ends.
  double seam_width = 8.0;
  double pairing_front = 20.0;
};

struct DecompositionError : std::runtime_error {
  DecompositionError(const std::string& what, double last_residual)
      : std::runtime_error(what), residual(last_residual) {}
  double residual;
};

struct SplitState {
  RealField2D v2;           // remainder in the crest frame z = x - x(t, y)
  ModulationState mod;
  double residual = 0.0;    // ||(F1, F2)||_inf at the solution
  int iterations = 0;
  double utilde_xnorm = 0.0;
};

// Orthogonality functionals and their Newton solve.
class Decomposer {
 public:
  Decomposer(const Grid2D& grid, const DecompositionOptions& options);

  const YBand& band() const { return band_; }
  const DecompositionOptions& options() const { return options_; }
  const Grid2D& grid() const { return grid_; }

  // Grid-frame position of the unmodulated reference soliton at time t.
  double reference_position(double t) const;

  // F_k(eta_m) for m = 0..M (negative modes are conjugates). `base` is u - v1 on
  // the grid; gamma is the crest offset relative to the reference soliton.
  struct Functionals {
    Eigen::ArrayXcd f1, f2;
  };
  Functionals eval_F(const RealField2D& base, const Eigen::ArrayXd& amplitude, const Eigen::ArrayXd& gamma,
                     double t) const;
  // Real residual vector and Jacobian with respect to band coordinates
  // [c_tilde coords, gamma coords].
  Eigen::VectorXd residual(const RealField2D& base, const Eigen::VectorXd& params, double t) const;
  Eigen::MatrixXd jacobian(const RealField2D& base, const Eigen::VectorXd& params, double t) const;

  Eigen::VectorXd pack(const ModulationState& mod) const;
  ModulationState unpack(const Eigen::VectorXd& params, double t) const;

  // Solves F = 0 starting from `guess` (its t is ignored). v1 may be null.
  SplitState decompose(const RealField2D& u, double t, const RealField2D* v1, const ModulationState& guess) const;

  // u - phi_c(. - p) + correction: the remainder in grid coordinates.
  RealField2D remainder(const RealField2D& base, const Eigen::ArrayXd& amplitude, const Eigen::ArrayXd& gamma,
                        double t) const;

 private:
  void line_pairings(const RealField2D& base, int j, double amplitude, double gamma, double t,
                     Eigen::ArrayXcd& h1, Eigen::ArrayXcd& h2) const;
  Grid2D grid_;
  DecompositionOptions options_;
  YBand band_;
};

struct TrackFrame {
  double t;
  RealField2D u;
  std::optional<RealField2D> v1;  // already on the grid frame of u
};

struct TrackResult {
  std::vector<SplitState> states;
  bool aborted = false;
  std::string reason;
};

// Decomposes frames in time order, each warm-started from the previous one.
// Stops cleanly (aborted = true) when a solve fails or smallness is breached.
using FrameSource = std::function<std::optional<TrackFrame>()>;
using TrackSink = std::function<void(const SplitState&)>;
TrackResult track(const Decomposer& dec, const FrameSource& next, const TrackSink& sink = {},
                  bool keep_states = false);

}  // namespace kpline
