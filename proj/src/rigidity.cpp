#include "posc/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posc/error.hpp"
#include "posc/rng.hpp"

namespace posc {

std::string to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::nondecreasing: return "nondecreasing";
    case Monotonicity::nonincreasing: return "nonincreasing";
    case Monotonicity::neither: return "neither";
  }
  return "unknown";
}

namespace {

void require_1d(const ScalarField& u) {
  if (u.lattice().dim() != 1) throw ValidationError("rigidity checks are 1-D only");
}

// Support as a single index interval [first, last].
std::pair<int, int> support_interval(const ScalarField& u) {
  require_1d(u);
  const Region& s = u.support();
  if (s.empty()) throw ValidationError("field has empty support");
  const auto [lo, hi] = s.bounds();
  if (static_cast<int>(s.count()) != hi[0] - lo[0] + 1)
    throw ValidationError("rigidity checks need a contiguous support");
  return {lo[0], hi[0]};
}

}  // namespace

Monotonicity check_monotone(const ScalarField& u) {
  require_1d(u);
  bool up = true, down = true;
  bool have_prev = false;
  double prev = 0.0;
  for (std::size_t idx : u.support().indices()) {
    const double v = u.at(idx);
    if (have_prev) {
      up = up && v >= prev;
      down = down && v <= prev;
    }
    prev = v;
    have_prev = true;
  }
  if (up) return Monotonicity::nondecreasing;
  if (down) return Monotonicity::nonincreasing;
  return Monotonicity::neither;
}

ClassAAudit class_a_audit(const ScalarField& u, const OscParams& params, int window_count,
                          int trials, std::uint64_t seed) {
  const auto [s0, s1] = support_interval(u);
  const int k = params.stencil().k();
  const int lo = s0 + k;
  const int hi = s1 - k;
  if (hi - lo < 2 * k) throw ValidationError("support too short for an interval with nonempty interior");
  if (window_count < 1) throw ValidationError("window count must be positive");

  ClassAAudit out;
  std::mt19937_64 rng = stream_rng(seed, 0xC1A55A);
  for (int w = 0; w < window_count; ++w) {
    int a = lo, b = hi;
    if (w > 0) {
      a = std::uniform_int_distribution<int>(lo, hi - 2 * k)(rng);
      b = std::uniform_int_distribution<int>(a + 2 * k, hi)(rng);
    }
    const Region ball = Region::index_range(u.lattice(), a, b);
    const AuditResult r = minimizer_audit(u, ball, params, trials, mix_seed(seed, w));
    ++out.windows;
    if (r.worst_decrease < out.worst_decrease) {
      out.worst_decrease = r.worst_decrease;
      out.worst_window = ball;
      out.witness = r.witness;
      out.worst_kind = r.worst_kind;
    }
  }
  return out;
}

double second_difference_residual(const ScalarField& u, int k) {
  require_1d(u);
  if (k < 1) throw ValidationError("shift k must be positive");
  const Region& s = u.support();
  const int n = u.lattice().extent(0);
  const auto v = u.dense();
  double worst = 0.0;
  for (int i = 2 * k; i + 2 * k < n; ++i) {
    if (!s.contains(static_cast<std::size_t>(i - 2 * k)) || !s.contains(static_cast<std::size_t>(i)) ||
        !s.contains(static_cast<std::size_t>(i + 2 * k)))
      continue;
    worst = std::max(worst, std::abs(v[i + 2 * k] - 2.0 * v[i] + v[i - 2 * k]));
  }
  return worst;
}

Decomposition periodic_decompose(const ScalarField& u, int k) {
  const auto [s0, s1] = support_interval(u);
  if (k < 1) throw ValidationError("shift k must be positive");
  const int n = s1 - s0 + 1;
  const int period = 2 * k;
  if (n < 2 * period) throw ValidationError("too few periods: support needs at least 4k cells");
  const Lattice& lat = u.lattice();
  const auto v = u.dense();

  Decomposition d;
  double sum = 0.0;
  double gmin = std::numeric_limits<double>::infinity();
  double gmax = -std::numeric_limits<double>::infinity();
  for (int i = s0; i + period <= s1; ++i) {
    const double g = v[i + period] - v[i];
    sum += g;
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
  const int shifts = n - period;
  d.slope = sum / shifts / (period * lat.h());
  d.shift_spread = gmax - gmin;

  d.phase.assign(period, 0.0);
  std::vector<int> hits(period, 0);
  for (int i = s0; i <= s1; ++i) {
    const int j = (i - s0) % period;
    d.phase[j] += v[i] - d.slope * lat.center(0, i);
    ++hits[j];
  }
  for (int j = 0; j < period; ++j) d.phase[j] /= hits[j];
  for (int i = s0; i <= s1; ++i) {
    const double fit = d.slope * lat.center(0, i) + d.phase[(i - s0) % period];
    d.residual = std::max(d.residual, std::abs(v[i] - fit));
  }
  return d;
}

NecessityDemo collar_necessity_demo(const ScalarField& u, const OscParams& params, int trials,
                                    std::uint64_t seed) {
  const auto [s0, s1] = support_interval(u);
  const int k = params.stencil().k();
  if (s1 - k < s0 + k) throw ValidationError("support too short for a ball with full windows");
  NecessityDemo out;
  out.ball = Region::index_range(u.lattice(), s0 + k, s1 - k);
  const AuditResult r = perturbation_audit(u, out.ball, out.ball, params, trials, seed);
  const double base = energy(u, out.ball, params);
  out.decrease = r.worst_decrease;
  out.found = r.worst_decrease < -1e-12 * std::max(1.0, base);
  if (out.found) {
    out.witness = r.witness;
    out.kind = r.worst_kind;
  }
  return out;
}

std::pair<double, double> jensen_sides(const ScalarField& u, const Region& omega,
                                       const OscParams& params) {
  const OscField f = window_extrema_fast(u, params.stencil(), omega);
  const double p = params.p();
  double sum = 0.0, sum_p = 0.0;
  for (std::size_t idx : omega.indices()) {
    sum += f.osc[idx];
    sum_p += std::pow(f.osc[idx], p);
  }
  const double n = static_cast<double>(omega.count());
  if (n == 0.0) return {0.0, 0.0};
  return {std::pow(sum, p) / std::pow(n, p - 1.0), sum_p};
}

}  // namespace posc
