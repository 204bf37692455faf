#pragma once

// Scalar fields on lattice regions, windowed sup/inf engines, and the
// p-oscillation energy  h^dim * sum_{x in omega} (max_{B(x)} u - min_{B(x)} u)^p.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "posc/grid.hpp"

namespace posc {

/// Real values on the cells of a support region. Values are stored densely
/// over the lattice; reading a cell outside the support is an error.
class ScalarField {
 public:
  ScalarField() = default;
  /// `dense` holds one value per lattice cell; entries off the support are ignored.
  ScalarField(Region support, std::vector<double> dense);

  static ScalarField from_function(const Region& support,
                                   const std::function<double(double, double)>& fn);
  static ScalarField constant(const Region& support, double value);

  const Lattice& lattice() const { return support_.lattice(); }
  const Region& support() const { return support_; }

  double at(std::size_t idx) const;
  double at(Cell c) const { return at(lattice().index(c)); }
  /// Unchecked dense storage, zero off the support.
  std::span<const double> dense() const { return values_; }

  /// Copy with `values` replacing the field on the given cells.
  ScalarField with_values(std::span<const std::size_t> cells, std::span<const double> values) const;
  ScalarField map(const std::function<double(double)>& fn) const;
  /// Translation by a lattice vector, support included.
  ScalarField shifted(Cell by) const;

  double min_value() const;
  double max_value() const;

  friend bool operator==(const ScalarField& a, const ScalarField& b) {
    return a.support_ == b.support_ && a.values_ == b.values_;
  }

 private:
  Region support_;
  std::vector<double> values_;
};

/// lambda*u + mu*v on the common support.
ScalarField combine(double lambda, const ScalarField& u, double mu, const ScalarField& v);
ScalarField pointwise_min(const ScalarField& u, double c);
ScalarField pointwise_max(const ScalarField& u, double c);

/// Radius, exponent and the derived ball stencil.
class OscParams {
 public:
  OscParams(double r, double p, const Lattice& lattice);

  double r() const { return r_; }
  double p() const { return p_; }
  const BallStencil& stencil() const { return stencil_; }
  /// k*h, the radius the discrete identities actually see.
  double effective_radius(double h) const { return stencil_.radius(h); }

 private:
  double r_;
  double p_;
  BallStencil stencil_;
};

/// Windowed extrema over an evaluation region; entries off `eval` are zero.
struct OscField {
  Region eval;
  std::vector<double> sup;
  std::vector<double> inf;
  std::vector<double> osc;
};

/// Throws ValidationError("field undefined inside a window") unless every
/// window centered in `eval` lies inside the lattice and the support of `u`.
void require_windows_in_support(const Region& support, const BallStencil& s, const Region& eval);

/// Reference engine: scans every stencil offset, O(|eval| * |s|).
OscField window_extrema_naive(const ScalarField& u, const BallStencil& s, const Region& eval);

/// Monotone-deque engine; chord decomposition in 2-D. Bit-identical to the
/// naive engine.
OscField window_extrema_fast(const ScalarField& u, const BallStencil& s, const Region& eval);

/// Running max/min of `in` over the clipped window [i-w, i+w], O(n).
void sliding_extrema(std::span<const double> in, int w, std::span<double> max_out,
                     std::span<double> min_out);

double energy(const ScalarField& u, const Region& omega, const OscParams& params);
/// Energy from a precomputed oscillation field over `omega`.
double energy_from_osc(const OscField& f, double p);

/// max over eval of |osc(u) - osc(min{u,c}) - osc(max{u,c})|; exactly 0 in exact arithmetic.
double osc_split_check(const ScalarField& u, double c, const BallStencil& s, const Region& eval);

/// max over eval of osc(lambda*u + mu*v) - lambda*osc(u) - mu*osc(v).
double triangle_check(const ScalarField& u, const ScalarField& v, double lambda, double mu,
                      const BallStencil& s, const Region& eval);

}  // namespace posc
