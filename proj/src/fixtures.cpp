#include "posc/fixtures.hpp"

#include <cmath>

#include "posc/error.hpp"

namespace posc::fixtures {

Lattice cell_centered_line(double a, double b, double h) {
  const int n = static_cast<int>(std::lround((b - a) / h));
  if (n <= 0) throw ValidationError("empty fixture interval");
  return Lattice::line(h, n, a + 0.5 * h);
}

DirichletProblem wide_window_problem(double p, double h) {
  const Lattice lat = cell_centered_line(-4.0, 4.0, h);
  const Region all = Region::full(lat);
  return DirichletProblem(Region::interval(lat, -1.0, 1.0),
                          ScalarField::from_function(all, [](double x, double) { return x; }),
                          OscParams(3.0, p, lat));
}

DirichletProblem hidden_jump_problem(double h, double r, double p) {
  const double a = 0.0, b = 2.0;
  const Lattice lat = cell_centered_line(a - r, b + r, h);
  const Region omega = Region::interval(lat, a, b);
  const Region boundary = Region::full(lat) - omega;
  const ScalarField data = ScalarField::from_function(
      boundary, [a, r](double x, double) { return x <= a - 0.5 * r ? 1.0 : 0.0; });
  return DirichletProblem(omega, data, OscParams(r, p, lat));
}

PlanarSet disk(double R, double r, double h) {
  const double half = R + 2.0 * r + 5.0 * h;
  const int n = 2 * static_cast<int>(std::ceil(half / h));
  const double o = -0.5 * (n - 1) * h;
  const Lattice lat = Lattice::plane(h, n, n, {o, o});
  const int k = ball_stencil(r, h, 2).k();
  const Region ambient = Region::full(lat);
  Region e = Region::where(lat, [R](double x, double y) { return x * x + y * y <= R * R; });
  return {IndicatorSet(std::move(e), ambient), Region::index_box(lat, {k, k}, {n - 1 - k, n - 1 - k})};
}

PlanarSet half_line(double r, double h) {
  const Lattice lat = cell_centered_line(-1.0 - 2.0 * r, 1.0 + 2.0 * r, h);
  const Region ambient = Region::full(lat);
  Region e = Region::where(lat, [](double x, double) { return x > 0.0; });
  return {IndicatorSet(std::move(e), ambient), Region::interval(lat, -1.0, 1.0)};
}

ScalarField staircase(double h) {
  const Lattice lat = cell_centered_line(-1.5, 1.5, h);
  return ScalarField::from_function(Region::full(lat), [](double x, double) {
    if (x < -0.6) return 0.0;
    if (x < 0.1) return 0.5;
    if (x < 0.7) return 2.0;
    return 3.0;
  });
}

InpaintScene inpaint_scene(int n) {
  const Lattice lat = Lattice::plane(1.0, n, n);
  const double c = 0.5 * (n - 1);
  const double rad = 0.22 * n;
  ScalarField image = ScalarField::from_function(Region::full(lat), [c, rad](double x, double y) {
    if ((x - c) * (x - c) + (y - c) * (y - c) <= rad * rad) return 0.9;
    return x < c ? 0.2 : 0.5;
  });
  const int lo = n / 2 - n / 6;
  const int hi = n / 2 + n / 6;
  return {std::move(image), Region::index_box(lat, {lo, lo + n / 8}, {hi, hi + n / 8})};
}

}  // namespace posc::fixtures
