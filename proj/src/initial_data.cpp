#include "kpline/initial_data.hpp"

#include <cmath>
#include <random>

namespace kpline {

PerturbationKind parse_perturbation_kind(const std::string& name) {
  if (name == "none") return PerturbationKind::none;
  if (name == "dx_gaussian") return PerturbationKind::dx_gaussian;
  if (name == "random_dx") return PerturbationKind::random_dx;
  if (name == "crest") return PerturbationKind::crest;
  throw InvalidArgument("unknown perturbation kind '" + name + "' (none, dx_gaussian, random_dx, crest)");
}

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::none: return "none";
    case PerturbationKind::dx_gaussian: return "dx_gaussian";
    case PerturbationKind::random_dx: return "random_dx";
    case PerturbationKind::crest: return "crest";
  }
  return "none";
}

namespace {

// x-derivative of exp(-(x/wx)^2) scaled by wx so the peak is O(1).
double dx_envelope(double x, double wx) {
  const double s = x / wx;
  return -2.0 * s * std::exp(-s * s);
}

// Random y-profile: a few low Fourier modes with N(0,1) coefficients,
// normalised to unit sup norm. `max_mode` is the highest mode index used.
Eigen::ArrayXd random_y_profile(const Grid2D& g, std::mt19937_64& rng, int max_mode) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::ArrayXd prof = Eigen::ArrayXd::Constant(g.ny(), normal(rng));
  for (int m = 1; m <= max_mode; ++m) {
    const double a = normal(rng), b = normal(rng);
    const Eigen::ArrayXd phase = g.eta_spacing() * m * g.ys();
    prof += a * phase.cos() + b * phase.sin();
  }
  const double peak = prof.abs().maxCoeff();
  return peak > 0 ? Eigen::ArrayXd(prof / peak) : prof;
}

int band_modes(const Grid2D& g, double eta0) {
  int m = 0;
  while ((m + 1) < g.ny() / 2 && (m + 1) * g.eta_spacing() <= eta0 * (1.0 + 1e-12)) ++m;
  return m;
}

}  // namespace

RealField2D localized_perturbation(const Grid2D& grid, const PerturbationSpec& spec) {
  RealField2D v(grid);
  const double eps = spec.amplitude;
  switch (spec.kind) {
    case PerturbationKind::none:
    case PerturbationKind::crest:
      return v;
    case PerturbationKind::dx_gaussian:
      for (int j = 0; j < grid.ny(); ++j) {
        const double gy = std::exp(-std::pow(grid.y(j) / spec.y_width, 2));
        for (int i = 0; i < grid.nx(); ++i)
          v.values(i, j) = eps * gy * dx_envelope(grid.x(i) - spec.x_centre, spec.x_width);
      }
      return v;
    case PerturbationKind::random_dx: {
      std::mt19937_64 rng(spec.seed);
      const int modes = std::max(1, static_cast<int>(grid.ly() / (2.0 * spec.y_width)));
      const Eigen::ArrayXd prof = random_y_profile(grid, rng, std::min(modes, grid.ny() / 2 - 1));
      for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i)
          v.values(i, j) = eps * prof(j) * dx_envelope(grid.x(i) - spec.x_centre, spec.x_width);
      return v;
    }
  }
  return v;
}

InitialData make_initial_data(const Grid2D& grid, const PerturbationSpec& spec, double offset_L, double eta0) {
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude))
    throw InvalidArgument("perturbation.amplitude must be a finite non-negative number");
  if (!(spec.x_width > 0.0) || !(spec.y_width > 0.0))
    throw InvalidArgument("perturbation widths must be positive");
  CrestProfiles crest = CrestProfiles::flat(grid.ny());
  if (spec.kind == PerturbationKind::crest && spec.amplitude > 0.0) {
    std::mt19937_64 rng(spec.seed);
    const int modes = band_modes(grid, eta0);
    crest.amplitude += spec.amplitude * random_y_profile(grid, rng, modes);
    crest.position += spec.amplitude * random_y_profile(grid, rng, modes);
    if ((crest.amplitude <= 0.0).any()) throw InvalidArgument("perturbation.amplitude too large for a crest profile");
  }
  RealField2D free0 = localized_perturbation(grid, spec);
  RealField2D u0 = assemble_ansatz(grid, crest, offset_L);
  u0.values += free0.values;
  return {std::move(u0), std::move(free0), std::move(crest)};
}

}  // namespace kpline
