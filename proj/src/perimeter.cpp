#include "posc/perimeter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "posc/error.hpp"

namespace posc {

IndicatorSet::IndicatorSet(Region set, Region ambient)
    : set_(std::move(set)), ambient_(std::move(ambient)) {
  if (!set_.subset_of(ambient_)) throw ValidationError("indicator set must lie inside its ambient support");
}

ScalarField IndicatorSet::indicator() const {
  std::vector<double> v(ambient_.lattice().size(), 0.0);
  for (std::size_t idx : set_.indices()) v[idx] = 1.0;
  return ScalarField(ambient_, std::move(v));
}

Region perimeter_band(const IndicatorSet& e, const BallStencil& s) {
  return dilate(e.set(), s, Overflow::clip) & dilate(e.complement(), s, Overflow::clip);
}

double per_r(const IndicatorSet& e, const Region& omega, double r) {
  const Lattice& lat = omega.lattice();
  const BallStencil s = ball_stencil(r, lat.h(), lat.dim());
  require_windows_in_support(e.ambient(), s, omega);
  return measure(perimeter_band(e, s) & omega) / (2.0 * s.radius(lat.h()));
}

IndicatorSet level_set(const ScalarField& u, double s) {
  const Region& support = u.support();
  std::vector<std::uint8_t> mask(support.lattice().size(), 0);
  const auto v = u.dense();
  for (std::size_t idx = 0; idx < mask.size(); ++idx)
    mask[idx] = support.contains(idx) && v[idx] > s;
  return IndicatorSet(Region(support.lattice(), std::move(mask)), support);
}

double CoareaResult::residual() const { return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)); }

CoareaResult coarea_both_sides(const ScalarField& u, const Region& omega, double r,
                               std::size_t max_levels) {
  const Lattice& lat = u.lattice();
  const OscParams params(r, 1.0, lat);
  const BallStencil& s = params.stencil();
  require_windows_in_support(u.support(), s, omega);

  // Only values inside some window matter; the identity is taken over them.
  const Region reach = dilate(omega, s, Overflow::reject);
  std::vector<double> levels;
  for (std::size_t idx : reach.indices()) levels.push_back(u.at(idx));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() > max_levels) {
    std::ostringstream msg;
    msg << "coarea check requires finite-valued field (" << levels.size()
        << " distinct values, limit " << max_levels << ")";
    throw ValidationError(msg.str());
  }

  CoareaResult out;
  out.lhs = energy(u, omega, params);
  out.profile.thresholds = levels;
  const double two_r = 2.0 * s.radius(lat.h());
  double rhs = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double per = per_r(level_set(u, levels[i]), omega, r);
    out.profile.perimeters.push_back(per);
    if (i + 1 < levels.size()) rhs += (levels[i + 1] - levels[i]) * per;
  }
  out.rhs = two_r * rhs;
  return out;
}

ScalarField clamp_rescale(const ScalarField& u, double lambda, double s) {
  if (!(lambda > 0.0)) throw ValidationError("clamp_rescale needs lambda > 0");
  return u.map([lambda, s](double x) { return 0.5 + std::clamp(lambda * (x - s), -0.5, 0.5); });
}

double discrete_tv(const ScalarField& u, const Region& omega) {
  const Lattice& lat = u.lattice();
  const Region& support = u.support();
  const auto v = u.dense();
  const double h = lat.h();
  double sum = 0.0;
  for (std::size_t idx : omega.indices()) {
    if (!support.contains(idx)) continue;
    const Cell c = lat.cell(idx);
    const Cell ex{c[0] + 1, c[1]};
    if (!support.contains(ex)) continue;
    const double gx = (v[lat.index(ex)] - v[idx]) / h;
    if (lat.dim() == 1) {
      sum += std::abs(gx);
      continue;
    }
    const Cell ey{c[0], c[1] + 1};
    if (!support.contains(ey)) continue;
    const double gy = (v[lat.index(ey)] - v[idx]) / h;
    sum += std::hypot(gx, gy);
  }
  return lat.cell_measure() * sum;
}

std::vector<GammaRow> gamma_experiment(const ScalarField& u, const Region& omega,
                                       const std::vector<double>& radii) {
  const double tv = discrete_tv(u, omega);
  std::vector<GammaRow> rows;
  for (double r : radii) {
    const OscParams params(r, 1.0, u.lattice());
    GammaRow row;
    row.r = r;
    row.effective_r = params.effective_radius(u.lattice().h());
    row.normalized_energy = energy(u, omega, params) / (2.0 * row.effective_r);
    row.tv = tv;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace posc
