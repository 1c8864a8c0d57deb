#pragma once

#include <cstdint>
#include <string>

#include "kpline/grid.hpp"
#include "kpline/soliton.hpp"

namespace kpline {

enum class PerturbationKind { none, dx_gaussian, random_dx, crest };

PerturbationKind parse_perturbation_kind(const std::string& name);
std::string to_string(PerturbationKind kind);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::none;
  double amplitude = 0.0;   // epsilon
  std::uint64_t seed = 1;
  double x_width = 2.0;     // localisation widths of the Gaussian envelope
  double y_width = 8.0;
  double x_centre = 0.0;    // relative to the crest
};

// Initial data for a perturbed line soliton (amplitude 2, crest at x = 0).
//   u0       total field
//   free0    initial data of the free companion run (zero line mass)
//   crest0   amplitude and position profiles used to build u0
struct InitialData {
  RealField2D u0;
  RealField2D free0;
  CrestProfiles crest0;
};

// `offset_L` places the mass-correction bump behind the crest; `eta0` limits the
// crest profiles of the `crest` kind to the resonant band.
InitialData make_initial_data(const Grid2D& grid, const PerturbationSpec& spec, double offset_L, double eta0);

// The localised perturbation alone (empty for `none` and `crest`).
RealField2D localized_perturbation(const Grid2D& grid, const PerturbationSpec& spec);

}  // namespace kpline
