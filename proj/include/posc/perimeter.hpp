#pragma once

// Nonlocal Minkowski-type perimeter, level sets, the discrete coarea
// identity, and the r -> 0 comparison against discrete total variation.

#include <cstddef>
#include <vector>

#include "posc/grid.hpp"
#include "posc/oscillation.hpp"

namespace posc {

/// A set E inside an ambient support region on which chi_E is defined.
class IndicatorSet {
 public:
  IndicatorSet(Region set, Region ambient);

  const Region& set() const { return set_; }
  const Region& ambient() const { return ambient_; }
  /// ambient \ E
  Region complement() const { return ambient_ - set_; }
  /// chi_E as a field on the ambient support, values exactly 0 or 1.
  ScalarField indicator() const;

 private:
  Region set_;
  Region ambient_;
};

/// Cells whose window meets both E and its complement (within the ambient).
Region perimeter_band(const IndicatorSet& e, const BallStencil& s);

/// measure(band ∩ omega) / (2 k h). Windows centered in omega must lie in the ambient.
double per_r(const IndicatorSet& e, const Region& omega, double r);

/// { x in support : u(x) > s }.
IndicatorSet level_set(const ScalarField& u, double s);

struct LevelProfile {
  std::vector<double> thresholds;  ///< sorted distinct values s_0 < ... < s_m
  std::vector<double> perimeters;  ///< Per_r({u > s_i}, omega), one per threshold
};

struct CoareaResult {
  double lhs = 0.0;  ///< E_{r,1}(u, omega)
  double rhs = 0.0;  ///< 2r * sum_i (s_{i+1} - s_i) * Per_r({u > s_i}, omega)
  LevelProfile profile;
  double residual() const;  ///< |lhs - rhs| / max(1, |lhs|)
};

/// Both sides of the coarea identity. Throws ValidationError when the values
/// of u seen by the windows take more than `max_levels` distinct values.
CoareaResult coarea_both_sides(const ScalarField& u, const Region& omega, double r,
                               std::size_t max_levels = 4096);

/// 1/2 + clamp(lambda * (u - s), -1/2, 1/2).
ScalarField clamp_rescale(const ScalarField& u, double lambda, double s);

/// h^dim * sum over omega of |forward-difference gradient|; cells whose forward
/// neighbours are not all in the support are skipped.
double discrete_tv(const ScalarField& u, const Region& omega);

struct GammaRow {
  double r = 0.0;            ///< requested radius
  double effective_r = 0.0;  ///< k*h
  double normalized_energy = 0.0;  ///< E_{r,1}(u, omega) / (2 k h)
  double tv = 0.0;
};

std::vector<GammaRow> gamma_experiment(const ScalarField& u, const Region& omega,
                                       const std::vector<double>& radii);

}  // namespace posc
