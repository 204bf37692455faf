#pragma once

// Reference problems and sets with known energies/perimeters.
// All 1-D lattices are cell-centered: an interval (a, b) holds exactly
// (b - a)/h cell centers.

#include "posc/perimeter.hpp"
#include "posc/solver.hpp"

namespace posc::fixtures {

/// Cell-centered 1-D lattice covering (a, b).
Lattice cell_centered_line(double a, double b, double h);

/// omega = (-1, 1), r = 3, u_o(x) = x on (-4, 4). Every competitor has energy
/// at least 2 * 6^p, attained by any interior values within [-1, 1].
DirichletProblem wide_window_problem(double p, double h = 0.01);

/// omega = (0, 2), r = 1 by default; data 1 on (-r, -r/2], 0 on (-r/2, 0] and on
/// [2, 2 + r). The zero interior is a minimizer with energy r/2.
DirichletProblem hidden_jump_problem(double h = 0.005, double r = 1.0, double p = 1.0);

struct PlanarSet {
  IndicatorSet set;
  Region omega;  ///< every cell whose window fits in the lattice
};

/// Closed disk of radius R centered at the origin, lattice wide enough that
/// the whole perimeter band lies in omega.
PlanarSet disk(double R, double r, double h);

/// E = {x > 0}, omega = (-1, 1) on a 1-D lattice covering (-1 - 2r, 1 + 2r).
PlanarSet half_line(double r, double h);

/// Piecewise-constant field on (-1.5, 1.5) with levels 0, 0.5, 2, 3.
ScalarField staircase(double h = 0.01);

struct InpaintScene {
  ScalarField image;  ///< 2-D field on the full lattice
  Region hole;        ///< omega
};

/// Two-tone image with a bright disk, and a square hole over the edges.
InpaintScene inpaint_scene(int n = 48);

}  // namespace posc::fixtures
