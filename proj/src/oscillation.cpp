#include "posc/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posc/error.hpp"
#include "posc/parallel.hpp"

namespace posc {

ScalarField::ScalarField(Region support, std::vector<double> dense)
    : support_(std::move(support)), values_(std::move(dense)) {
  if (values_.size() != support_.lattice().size())
    throw ValidationError("field storage does not match lattice size");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!support_.contains(i)) {
      values_[i] = 0.0;
    } else if (!std::isfinite(values_[i])) {
      throw ValidationError("field values must be finite on the support");
    }
  }
}

ScalarField ScalarField::from_function(const Region& support,
                                       const std::function<double(double, double)>& fn) {
  const Lattice& lat = support.lattice();
  std::vector<double> v(lat.size(), 0.0);
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    if (!support.contains(idx)) continue;
    const auto x = lat.center(lat.cell(idx));
    v[idx] = fn(x[0], x[1]);
  }
  return ScalarField(support, std::move(v));
}

ScalarField ScalarField::constant(const Region& support, double value) {
  return from_function(support, [value](double, double) { return value; });
}

double ScalarField::at(std::size_t idx) const {
  if (idx >= values_.size() || !support_.contains(idx))
    throw ValidationError("field evaluated outside its support");
  return values_[idx];
}

ScalarField ScalarField::with_values(std::span<const std::size_t> cells,
                                     std::span<const double> values) const {
  if (cells.size() != values.size()) throw ValidationError("cell/value count mismatch");
  std::vector<double> v = values_;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!support_.contains(cells[i])) throw ValidationError("assignment outside field support");
    v[cells[i]] = values[i];
  }
  return ScalarField(support_, std::move(v));
}

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (support_.contains(i)) v[i] = fn(values_[i]);
  return ScalarField(support_, std::move(v));
}

ScalarField ScalarField::shifted(Cell by) const {
  const Lattice& lat = lattice();
  Region moved = support_.shifted(by);
  std::vector<double> v(values_.size(), 0.0);
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    if (!support_.contains(idx)) continue;
    Cell c = lat.cell(idx);
    v[lat.index({c[0] + by[0], c[1] + by[1]})] = values_[idx];
  }
  return ScalarField(std::move(moved), std::move(v));
}

double ScalarField::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (support_.contains(i)) m = std::min(m, values_[i]);
  return m;
}

double ScalarField::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (support_.contains(i)) m = std::max(m, values_[i]);
  return m;
}

ScalarField combine(double lambda, const ScalarField& u, double mu, const ScalarField& v) {
  Region common = u.support() & v.support();
  std::vector<double> out(u.lattice().size(), 0.0);
  const auto a = u.dense();
  const auto b = v.dense();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (common.contains(i)) out[i] = lambda * a[i] + mu * b[i];
  return ScalarField(std::move(common), std::move(out));
}

ScalarField pointwise_min(const ScalarField& u, double c) {
  return u.map([c](double x) { return std::min(x, c); });
}

ScalarField pointwise_max(const ScalarField& u, double c) {
  return u.map([c](double x) { return std::max(x, c); });
}

OscParams::OscParams(double r, double p, const Lattice& lattice)
    : r_(r), p_(p), stencil_(ball_stencil(r, lattice.h(), lattice.dim())) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("exponent p must satisfy p >= 1");
}

void require_windows_in_support(const Region& support, const BallStencil& s, const Region& eval) {
  if (eval.empty()) return;
  Region reach(support.lattice());
  try {
    reach = dilate(eval, s, Overflow::reject);
  } catch (const ValidationError&) {
    throw ValidationError("field undefined inside a window (window leaves the lattice)");
  }
  if (!reach.subset_of(support)) throw ValidationError("field undefined inside a window");
}

namespace {

OscField make_osc_field(const Region& eval) {
  const std::size_t n = eval.lattice().size();
  return OscField{eval, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  std::vector<double>(n, 0.0)};
}

}  // namespace

OscField window_extrema_naive(const ScalarField& u, const BallStencil& s, const Region& eval) {
  require_windows_in_support(u.support(), s, eval);
  const Lattice& lat = u.lattice();
  OscField f = make_osc_field(eval);
  const auto v = u.dense();
  for (std::size_t idx : eval.indices()) {
    const Cell c = lat.cell(idx);
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (const Cell& off : s.offsets()) {
      const double x = v[lat.index({c[0] + off[0], c[1] + off[1]})];
      hi = std::max(hi, x);
      lo = std::min(lo, x);
    }
    f.sup[idx] = hi;
    f.inf[idx] = lo;
    f.osc[idx] = hi - lo;
  }
  return f;
}

void sliding_extrema(std::span<const double> in, int w, std::span<double> max_out,
                     std::span<double> min_out) {
  const int n = static_cast<int>(in.size());
  // Index queues; every index is pushed once, so plain arrays with
  // head/tail cursors never wrap.
  std::vector<int> qmax(n), qmin(n);
  int hmax = 0, tmax = 0, hmin = 0, tmin = 0;
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int right = std::min(i + w, n - 1);
    while (next <= right) {
      while (tmax > hmax && in[qmax[tmax - 1]] <= in[next]) --tmax;
      qmax[tmax++] = next;
      while (tmin > hmin && in[qmin[tmin - 1]] >= in[next]) --tmin;
      qmin[tmin++] = next;
      ++next;
    }
    const int left = i - w;
    while (qmax[hmax] < left) ++hmax;
    while (qmin[hmin] < left) ++hmin;
    max_out[i] = in[qmax[hmax]];
    min_out[i] = in[qmin[hmin]];
  }
}

namespace {

// Maximal runs [first, last] of consecutive eval cells within each row.
struct Run {
  int row;
  int first;
  int last;
};

std::vector<Run> row_runs(const Region& eval) {
  const Lattice& lat = eval.lattice();
  std::vector<Run> runs;
  for (int j = 0; j < lat.extent(1); ++j) {
    int i = 0;
    while (i < lat.extent(0)) {
      if (!eval.contains(lat.index({i, j}))) {
        ++i;
        continue;
      }
      const int first = i;
      while (i < lat.extent(0) && eval.contains(lat.index({i, j}))) ++i;
      runs.push_back({j, first, i - 1});
    }
  }
  return runs;
}

void fast_1d(const ScalarField& u, int k, OscField& f) {
  const Lattice& lat = u.lattice();
  const auto v = u.dense();
  std::vector<double> hi, lo;
  for (const Run& run : row_runs(f.eval)) {
    const int a = run.first - k;
    const int len = run.last - run.first + 1 + 2 * k;
    hi.resize(len);
    lo.resize(len);
    sliding_extrema(v.subspan(static_cast<std::size_t>(a), len), k, hi, lo);
    for (int i = run.first; i <= run.last; ++i) {
      const std::size_t idx = lat.index({i, run.row});
      f.sup[idx] = hi[i - a];
      f.inf[idx] = lo[i - a];
      f.osc[idx] = hi[i - a] - lo[i - a];
    }
  }
}

void fast_2d(const ScalarField& u, const BallStencil& s, OscField& f) {
  const Lattice& lat = u.lattice();
  const int k = s.k();
  const int nx = lat.extent(0);
  const auto v = u.dense();
  const auto [lo, hi] = f.eval.bounds();
  // Horizontal pass covers the eval box widened by k; windows of eval cells
  // never read outside it.
  const int x0 = lo[0] - k, x1 = hi[0] + k;
  const int y0 = lo[1] - k, y1 = hi[1] + k;
  const int bw = x1 - x0 + 1;
  const int bh = y1 - y0 + 1;
  std::vector<double> hmax(static_cast<std::size_t>(bw) * bh);
  std::vector<double> hmin(hmax.size());

  const std::vector<std::size_t> cells = f.eval.indices();
  for (std::size_t idx : cells) {
    f.sup[idx] = -std::numeric_limits<double>::infinity();
    f.inf[idx] = std::numeric_limits<double>::infinity();
  }

  for (int dy = 0; dy <= k; ++dy) {
    const int w = s.chord_half_width(dy);
    if (dy > 0 && w == s.chord_half_width(dy - 1)) {
      // same chord width as the previous pass; the buffers are still valid
    } else {
      parallel_for(static_cast<std::size_t>(bh), [&](std::size_t rb, std::size_t re) {
        for (std::size_t r = rb; r < re; ++r) {
          const int y = y0 + static_cast<int>(r);
          const auto row = v.subspan(static_cast<std::size_t>(y) * nx + x0, bw);
          sliding_extrema(row, w, std::span<double>(&hmax[r * bw], bw),
                          std::span<double>(&hmin[r * bw], bw));
        }
      }, 8);
    }
    parallel_for(cells.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t t = b; t < e; ++t) {
        const std::size_t idx = cells[t];
        const Cell c = lat.cell(idx);
        const std::size_t col = static_cast<std::size_t>(c[0] - x0);
        for (int sign : {-1, 1}) {
          if (dy == 0 && sign > 0) break;
          const std::size_t r = static_cast<std::size_t>(c[1] + sign * dy - y0);
          f.sup[idx] = std::max(f.sup[idx], hmax[r * bw + col]);
          f.inf[idx] = std::min(f.inf[idx], hmin[r * bw + col]);
        }
      }
    });
  }
  for (std::size_t idx : cells) f.osc[idx] = f.sup[idx] - f.inf[idx];
}

}  // namespace

OscField window_extrema_fast(const ScalarField& u, const BallStencil& s, const Region& eval) {
  require_windows_in_support(u.support(), s, eval);
  OscField f = make_osc_field(eval);
  if (eval.empty()) return f;
  if (u.lattice().dim() == 1) {
    fast_1d(u, s.k(), f);
  } else {
    fast_2d(u, s, f);
  }
  return f;
}

double energy_from_osc(const OscField& f, double p) {
  double sum = 0.0;
  const auto& m = f.eval.mask();
  if (p == 1.0) {
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) sum += f.osc[i];
  } else {
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) sum += std::pow(f.osc[i], p);
  }
  return f.eval.lattice().cell_measure() * sum;
}

double energy(const ScalarField& u, const Region& omega, const OscParams& params) {
  return energy_from_osc(window_extrema_fast(u, params.stencil(), omega), params.p());
}

double osc_split_check(const ScalarField& u, double c, const BallStencil& s, const Region& eval) {
  const OscField whole = window_extrema_fast(u, s, eval);
  const OscField low = window_extrema_fast(pointwise_min(u, c), s, eval);
  const OscField high = window_extrema_fast(pointwise_max(u, c), s, eval);
  double worst = 0.0;
  for (std::size_t idx : eval.indices())
    worst = std::max(worst, std::abs(whole.osc[idx] - low.osc[idx] - high.osc[idx]));
  return worst;
}

double triangle_check(const ScalarField& u, const ScalarField& v, double lambda, double mu,
                      const BallStencil& s, const Region& eval) {
  if (lambda < 0.0 || mu < 0.0) throw ValidationError("triangle check needs lambda, mu >= 0");
  const OscField fu = window_extrema_fast(u, s, eval);
  const OscField fv = window_extrema_fast(v, s, eval);
  const OscField fw = window_extrema_fast(combine(lambda, u, mu, v), s, eval);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t idx : eval.indices())
    worst = std::max(worst, fw.osc[idx] - lambda * fu.osc[idx] - mu * fv.osc[idx]);
  return eval.empty() ? 0.0 : worst;
}

}  // namespace posc
