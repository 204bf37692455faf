#include "posc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "posc/error.hpp"
#include "posc/parallel.hpp"
#include "posc/rng.hpp"

namespace posc {

DirichletProblem::DirichletProblem(Region omega, ScalarField data, OscParams params)
    : omega_(std::move(omega)), data_(std::move(data)), params_(std::move(params)) {
  if (!(omega_.lattice() == data_.lattice()))
    throw ValidationError("domain and data live on different lattices");
  const Region reach = dilate(omega_, params_.stencil(), Overflow::reject);
  boundary_ = reach - omega_;
  if (!boundary_.subset_of(data_.support()))
    throw ValidationError("boundary data must cover dilate(omega) minus omega");
}

std::vector<double> DirichletProblem::boundary_levels() const {
  std::vector<double> levels;
  for (std::size_t idx : boundary_.indices()) levels.push_back(data_.at(idx));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

double DirichletProblem::boundary_sup_norm() const {
  double m = 0.0;
  for (std::size_t idx : boundary_.indices()) m = std::max(m, std::abs(data_.at(idx)));
  return m;
}

ScalarField DirichletProblem::assemble(std::span<const double> interior) const {
  const std::vector<std::size_t> cells = omega_.indices();
  if (interior.size() != cells.size()) throw ValidationError("interior value count mismatch");
  std::vector<double> v(data_.lattice().size(), 0.0);
  const auto d = data_.dense();
  for (std::size_t idx : boundary_.indices()) v[idx] = d[idx];
  for (std::size_t i = 0; i < cells.size(); ++i) v[cells[i]] = interior[i];
  return ScalarField(boundary_ | omega_, std::move(v));
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iters: return "max_iters";
    case Termination::stalled: return "stalled";
    case Termination::zero_energy: return "zero_energy";
    case Termination::zero_subgradient: return "zero_subgradient";
    case Termination::no_free_cells: return "no_free_cells";
  }
  return "unknown";
}

ScalarField initial_field(const DirichletProblem& prob) {
  const std::vector<std::size_t> cells = prob.omega().indices();
  std::vector<double> interior(cells.size());
  if (prob.has_interior_data()) {
    for (std::size_t i = 0; i < cells.size(); ++i) interior[i] = prob.data().at(cells[i]);
  } else {
    double sum = 0.0;
    const auto b = prob.boundary().indices();
    for (std::size_t idx : b) sum += prob.data().at(idx);
    std::fill(interior.begin(), interior.end(), b.empty() ? 0.0 : sum / b.size());
  }
  return prob.assemble(interior);
}

namespace {

std::vector<std::ptrdiff_t> linear_offsets(const Lattice& lat, const BallStencil& s) {
  std::vector<std::ptrdiff_t> out;
  for (const Cell& off : s.offsets())
    out.push_back(static_cast<std::ptrdiff_t>(off[1]) * lat.extent(0) + off[0]);
  return out;
}

void interior_of(std::span<const double> dense, const std::vector<std::size_t>& cells,
                 std::vector<double>& out) {
  out.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) out[i] = dense[cells[i]];
}

// Energy and a tie-averaged subgradient with respect to the free cells.
struct SubgradientEngine {
  const Lattice& lat;
  std::vector<std::size_t> cells;
  std::vector<int> free_pos;  // lattice index -> position in cells, -1 if fixed
  std::vector<std::ptrdiff_t> offsets;
  double p;

  SubgradientEngine(const DirichletProblem& prob)
      : lat(prob.omega().lattice()),
        cells(prob.omega().indices()),
        free_pos(lat.size(), -1),
        offsets(linear_offsets(lat, prob.params().stencil())),
        p(prob.params().p()) {
    for (std::size_t i = 0; i < cells.size(); ++i) free_pos[cells[i]] = static_cast<int>(i);
  }

  double evaluate(const std::vector<double>& x, std::vector<double>& grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double cm = lat.cell_measure();
    double sum = 0.0;
    for (std::size_t center : cells) {
      const auto c = static_cast<std::ptrdiff_t>(center);
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      for (std::ptrdiff_t off : offsets) {
        const double v = x[c + off];
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
      const double osc = hi - lo;
      sum += p == 1.0 ? osc : std::pow(osc, p);
      if (!(osc > 0.0)) continue;
      const double coeff = cm * (p == 1.0 ? 1.0 : p * std::pow(osc, p - 1.0));
      int nhi = 0, nlo = 0;
      for (std::ptrdiff_t off : offsets) {
        const double v = x[c + off];
        nhi += v == hi;
        nlo += v == lo;
      }
      for (std::ptrdiff_t off : offsets) {
        const std::size_t y = static_cast<std::size_t>(c + off);
        const int pos = free_pos[y];
        if (pos < 0) continue;
        if (x[y] == hi) grad[pos] += coeff / nhi;
        if (x[y] == lo) grad[pos] -= coeff / nlo;
      }
    }
    return cm * sum;
  }
};

}  // namespace

ScalarField level_rounding(const DirichletProblem& prob, const ScalarField& u,
                           const std::vector<double>& levels, std::size_t max_candidates,
                           std::uint64_t seed) {
  const std::vector<std::size_t> cells = prob.omega().indices();
  if (levels.empty() || cells.empty()) return u;
  const double lo = levels.front();
  const double hi = levels.back();
  std::vector<double> w(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) w[i] = std::clamp(u.at(cells[i]), lo, hi);

  const OscParams per_params(prob.params().r(), 1.0, prob.omega().lattice());
  const ScalarField base = prob.assemble(w);
  const Region& reach = base.support();
  const auto bv = base.dense();

  auto level_set_energy = [&](double s) {
    std::vector<double> chi(bv.size(), 0.0);
    for (std::size_t idx : reach.indices()) chi[idx] = bv[idx] > s ? 1.0 : 0.0;
    return energy(ScalarField(reach, std::move(chi)), prob.omega(), per_params);
  };

  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::mt19937_64 rng = stream_rng(seed, 0x10c);
  std::vector<double> chosen(levels.size() - 1);
  for (std::size_t g = 0; g + 1 < levels.size(); ++g) {
    std::vector<double> cand;
    for (double v : sorted)
      if (v > levels[g] && v < levels[g + 1]) cand.push_back(v);
    if (max_candidates > 0 && cand.size() + 1 > max_candidates) {
      std::shuffle(cand.begin(), cand.end(), rng);
      cand.resize(max_candidates - 1);
      std::sort(cand.begin(), cand.end());
    }
    cand.insert(cand.begin(), levels[g]);
    double best = std::numeric_limits<double>::infinity();
    for (double s : cand) {
      const double e = level_set_energy(s);
      if (e < best) {
        best = e;
        chosen[g] = s;
      }
    }
  }

  // Thresholds increase with g, so the chosen level sets are nested and the
  // rounded value is the level indexed by how many thresholds a cell exceeds.
  std::vector<double> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::size_t count = 0;
    while (count < chosen.size() && w[i] > chosen[count]) ++count;
    out[i] = levels[count];
  }
  return prob.assemble(out);
}

SolveReport solve_subgradient(const DirichletProblem& prob, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const OscParams& params = prob.params();
  if (params.p() < 1.0) throw ValidationError("exponent p must satisfy p >= 1");
  if (cfg.max_iters < 0) throw ValidationError("max_iters must be nonnegative");
  if (cfg.step0 && !(*cfg.step0 > 0.0)) throw ValidationError("initial step must be positive");
  if (!(cfg.tol >= 0.0)) throw ValidationError("stop tolerance must be nonnegative");

  SolveReport report;
  const double bound = cfg.clamp_bound.value_or(prob.boundary_sup_norm());
  if (!(bound >= 0.0)) throw ValidationError("clamp bound must be nonnegative");

  ScalarField init = initial_field(prob);
  const std::vector<std::size_t> cells = prob.omega().indices();
  std::vector<double> x(init.dense().begin(), init.dense().end());
  for (std::size_t idx : cells) x[idx] = std::clamp(x[idx], -bound, bound);
  std::vector<double> interior;
  interior_of(x, cells, interior);
  init = prob.assemble(interior);

  const auto finish = [&](ScalarField field, Termination why) {
    report.final_energy = energy(field, prob.omega(), params);
    report.field = std::move(field);
    report.termination = why;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  };

  report.initial_energy = energy(init, prob.omega(), params);
  if (cells.empty()) return finish(init, Termination::no_free_cells);

  const bool rounding = cfg.level_rounding && params.p() == 1.0;
  const std::vector<double> levels = prob.boundary_levels();

  double a0 = 1.0;
  if (cfg.step0) {
    a0 = *cfg.step0;
  } else {
    const double range = init.max_value() - init.min_value();
    if (range > 0.0) a0 = 0.25 * range;
  }

  SubgradientEngine engine(prob);
  std::vector<double> grad(cells.size());
  std::vector<double> best_interior = interior;
  double best = report.initial_energy;
  Termination why = Termination::max_iters;

  auto try_rounding = [&](const std::vector<double>& current) {
    interior_of(current, cells, interior);
    const ScalarField rounded = level_rounding(prob, prob.assemble(interior), levels,
                                               cfg.rounding_candidates, cfg.seed);
    const double e = energy(rounded, prob.omega(), params);
    // rounded values are boundary levels, which may sit outside a user-chosen box
    for (std::size_t idx : cells)
      if (std::abs(rounded.at(idx)) > bound) return;
    if (e < best) {
      best = e;
      interior_of(rounded.dense(), cells, best_interior);
    }
  };

  int t = 0;
  for (; t < cfg.max_iters; ++t) {
    const double e = engine.evaluate(x, grad);
    if (e < best) {
      best = e;
      interior_of(x, cells, best_interior);
    }
    if (rounding && t % std::max(cfg.rounding_every, 1) == 0) try_rounding(x);
    report.energy_trace.push_back(e);
    report.best_trace.push_back(best);
    if (best == 0.0) {
      why = Termination::zero_energy;
      ++t;
      break;
    }
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    if (gmax == 0.0) {
      // 0 lies in the subdifferential: the iterate is a global minimizer.
      why = Termination::zero_subgradient;
      ++t;
      break;
    }
    if (cfg.patience > 0 && t >= cfg.patience &&
        report.best_trace[t - cfg.patience] - best <= cfg.tol) {
      why = Termination::stalled;
      ++t;
      break;
    }
    const double step = a0 / std::sqrt(static_cast<double>(t) + 1.0) / gmax;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double& v = x[cells[i]];
      v = std::clamp(v - step * grad[i], -bound, bound);
    }
  }
  report.iterations = t;
  if (rounding) {
    try_rounding(x);
    std::vector<double> best_dense(x.size(), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) best_dense[cells[i]] = best_interior[i];
    try_rounding(best_dense);
  }
  return finish(prob.assemble(best_interior), why);
}

OracleResult brute_force_oracle(const DirichletProblem& prob, const std::vector<double>& levels) {
  const std::vector<std::size_t> cells = prob.omega().indices();
  const std::size_t n = cells.size();
  if (n > 16 || levels.size() > 5) {
    std::ostringstream msg;
    msg << "oracle instance too large (" << n << " free cells, " << levels.size()
        << " levels; limits 16 and 5)";
    throw ValidationError(msg.str());
  }
  if (levels.empty()) throw ValidationError("oracle needs at least one level");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i - 1] < levels[i])) throw ValidationError("oracle levels must be strictly increasing");
  const OscParams& params = prob.params();
  if (params.p() == 1.0) {
    for (double b : prob.boundary_levels())
      if (!std::binary_search(levels.begin(), levels.end(), b))
        throw ValidationError("oracle levels must include every boundary value for p = 1");
  }

  const Lattice& lat = prob.omega().lattice();
  std::vector<int> free_pos(lat.size(), -1);
  for (std::size_t i = 0; i < n; ++i) free_pos[cells[i]] = static_cast<int>(i);
  const auto offsets = linear_offsets(lat, params.stencil());
  const auto data = prob.data().dense();
  const double p = params.p();
  auto power = [p](double osc) { return p == 1.0 ? osc : std::pow(osc, p); };

  struct Window {
    double fixed_hi = -std::numeric_limits<double>::infinity();
    double fixed_lo = std::numeric_limits<double>::infinity();
    std::vector<int> free;
  };
  // Windows grouped by the position of their last free cell; those with no
  // free cell contribute a constant.
  std::vector<std::vector<Window>> completes_at(n);
  double constant = 0.0;
  for (std::size_t center : cells) {
    Window w;
    for (auto off : offsets) {
      const std::size_t y = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(center) + off);
      if (free_pos[y] >= 0) {
        w.free.push_back(free_pos[y]);
      } else {
        w.fixed_hi = std::max(w.fixed_hi, data[y]);
        w.fixed_lo = std::min(w.fixed_lo, data[y]);
      }
    }
    if (w.free.empty()) {
      constant += power(w.fixed_hi - w.fixed_lo);
    } else {
      const int last = *std::max_element(w.free.begin(), w.free.end());
      completes_at[last].push_back(std::move(w));
    }
  }

  std::vector<int> assign(n, 0), best_assign(n, 0);
  std::vector<double> value(n, levels.front());
  double best = std::numeric_limits<double>::infinity();
  auto tol = [&best] { return 1e-12 * std::max(1.0, std::isfinite(best) ? best : 1.0); };

  // Depth-first in lexicographic order; only strict improvements replace the
  // incumbent, so the first minimizer found is the lexicographically smallest.
  auto dfs = [&](auto&& self, std::size_t depth, double partial) -> void {
    if (partial >= best - tol()) return;
    if (depth == n) {
      best = partial;
      best_assign = assign;
      return;
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
      assign[depth] = static_cast<int>(l);
      value[depth] = levels[l];
      double add = 0.0;
      for (const Window& w : completes_at[depth]) {
        double hi = w.fixed_hi, lo = w.fixed_lo;
        for (int f : w.free) {
          hi = std::max(hi, value[f]);
          lo = std::min(lo, value[f]);
        }
        add += power(hi - lo);
      }
      self(self, depth + 1, partial + add);
    }
  };
  dfs(dfs, 0, constant);

  std::vector<double> interior(n);
  for (std::size_t i = 0; i < n; ++i) interior[i] = levels[best_assign[i]];
  OracleResult out{prob.assemble(interior), 0.0};
  out.energy = energy(out.field, prob.omega(), params);
  return out;
}

namespace {

struct Interval1d {
  std::vector<std::size_t> left;   // boundary cells left of omega, in order
  std::vector<std::size_t> right;  // boundary cells right of omega, in order
  double right_value = 0.0;        // u_o(b)
};

Interval1d interval_structure(const ScalarField& u, const DirichletProblem& prob) {
  const Region& omega = prob.omega();
  if (omega.lattice().dim() != 1) throw ValidationError("truncation and envelope are 1-D constructions");
  if (omega.empty()) throw ValidationError("omega must be a nonempty interval");
  const auto [lo, hi] = omega.bounds();
  if (static_cast<int>(omega.count()) != hi[0] - lo[0] + 1)
    throw ValidationError("omega must be a single interval");
  Interval1d out;
  for (std::size_t idx : prob.boundary().indices()) {
    if (static_cast<int>(idx) < lo[0]) out.left.push_back(idx);
    else out.right.push_back(idx);
  }
  if (out.right.empty()) throw ValidationError("missing right boundary data");
  const auto d = prob.data().dense();
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto* piece : {&out.left, &out.right})
    for (std::size_t idx : *piece) {
      if (d[idx] < prev) throw ValidationError("boundary data must be nondecreasing");
      prev = d[idx];
    }
  for (const auto* piece : {&out.left, &out.right})
    for (std::size_t idx : *piece)
      if (u.at(idx) != d[idx]) throw ValidationError("field must match the boundary data on the collar");
  out.right_value = d[out.right.front()];
  return out;
}

}  // namespace

ScalarField truncate_theta(const ScalarField& u, const DirichletProblem& prob) {
  const Interval1d iv = interval_structure(u, prob);
  std::vector<double> v(u.dense().begin(), u.dense().end());
  for (std::size_t idx : prob.omega().indices()) v[idx] = std::min(v[idx], iv.right_value);
  return ScalarField(u.support(), std::move(v));
}

ScalarField monotone_envelope(const ScalarField& u, const DirichletProblem& prob) {
  const Interval1d iv = interval_structure(u, prob);
  for (std::size_t idx : prob.omega().indices())
    if (u.at(idx) > iv.right_value)
      throw ValidationError("field exceeds the right boundary value; apply truncate_theta first");
  std::vector<double> v(u.dense().begin(), u.dense().end());
  const Region reach = prob.boundary() | prob.omega();
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t idx : reach.indices()) {
    running = std::max(running, v[idx]);
    v[idx] = running;
  }
  return ScalarField(u.support(), std::move(v));
}

std::string to_string(MoveKind k) {
  switch (k) {
    case MoveKind::none: return "none";
    case MoveKind::gaussian: return "gaussian";
    case MoveKind::spike: return "spike";
    case MoveKind::cut_min: return "cut_min";
    case MoveKind::cut_max: return "cut_max";
    case MoveKind::flatten: return "flatten";
  }
  return "unknown";
}

namespace {

constexpr MoveKind kMoveCycle[] = {MoveKind::gaussian, MoveKind::spike, MoveKind::cut_min,
                                   MoveKind::cut_max, MoveKind::flatten};

// Perturbation for one trial, written as a dense vector (zero off `cells`).
MoveKind draw_perturbation(const ScalarField& u, const std::vector<std::size_t>& cells,
                           std::uint64_t seed, int trial, std::vector<double>& phi) {
  std::fill(phi.begin(), phi.end(), 0.0);
  std::mt19937_64 rng = stream_rng(seed, static_cast<std::uint64_t>(trial));
  const MoveKind kind = kMoveCycle[trial % 5];
  const auto v = u.dense();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t idx : cells) {
    lo = std::min(lo, v[idx]);
    hi = std::max(hi, v[idx]);
  }
  const double range = u.max_value() - u.min_value();
  const double scale = range > 0.0 ? range : 1.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);

  switch (kind) {
    case MoveKind::gaussian: {
      std::normal_distribution<double> normal(0.0, scale * std::pow(10.0, -3.0 * unit(rng)));
      for (std::size_t idx : cells) phi[idx] = normal(rng);
      break;
    }
    case MoveKind::spike: {
      const int count = 1 + static_cast<int>(rng() % 3);
      std::normal_distribution<double> normal(0.0, scale * std::pow(10.0, -2.0 * unit(rng)));
      for (int i = 0; i < count; ++i) phi[cells[pick(rng)]] += normal(rng);
      break;
    }
    case MoveKind::cut_min:
    case MoveKind::cut_max: {
      const double c = lo + (hi - lo) * unit(rng);
      for (std::size_t idx : cells)
        phi[idx] = (kind == MoveKind::cut_min ? std::min(v[idx], c) : std::max(v[idx], c)) - v[idx];
      break;
    }
    case MoveKind::flatten: {
      // A random sub-box of the perturbation support, or all of it.
      const Lattice& lat = u.lattice();
      Cell a{lat.extent(0), lat.extent(1)}, b{-1, -1};
      for (std::size_t idx : cells) {
        const Cell c = lat.cell(idx);
        for (int ax = 0; ax < 2; ++ax) {
          a[ax] = std::min(a[ax], c[ax]);
          b[ax] = std::max(b[ax], c[ax]);
        }
      }
      if (unit(rng) >= 0.25) {
        for (int ax = 0; ax < 2; ++ax) {
          std::uniform_int_distribution<int> coord(a[ax], b[ax]);
          int x = coord(rng), y = coord(rng);
          if (x > y) std::swap(x, y);
          a[ax] = x;
          b[ax] = y;
        }
      }
      std::vector<std::size_t> box;
      double sum = 0.0;
      for (std::size_t idx : cells) {
        const Cell c = lat.cell(idx);
        if (c[0] >= a[0] && c[0] <= b[0] && c[1] >= a[1] && c[1] <= b[1]) {
          box.push_back(idx);
          sum += v[idx];
        }
      }
      if (box.empty()) break;
      const double c = unit(rng) < 0.5 ? sum / box.size() : lo + (hi - lo) * unit(rng);
      for (std::size_t idx : box) phi[idx] = c - v[idx];
      break;
    }
    case MoveKind::none:
      break;
  }
  return kind;
}

}  // namespace

AuditResult perturbation_audit(const ScalarField& u, const Region& omega, const Region& perturb,
                               const OscParams& params, int trials, std::uint64_t seed) {
  if (!perturb.subset_of(omega)) throw ValidationError("perturbation support must lie inside omega");
  if (trials < 0) throw ValidationError("trial count must be nonnegative");
  require_windows_in_support(u.support(), params.stencil(), omega);
  AuditResult result;
  result.trials = trials;
  const std::vector<std::size_t> cells = perturb.indices();
  if (cells.empty() || trials == 0) return result;

  const double base = energy(u, omega, params);
  std::vector<double> decrease(static_cast<std::size_t>(trials), 0.0);
  parallel_for(decrease.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> phi(u.lattice().size());
    for (std::size_t t = b; t < e; ++t) {
      draw_perturbation(u, cells, seed, static_cast<int>(t), phi);
      ScalarField moved(u.support(), [&] {
        std::vector<double> w(u.dense().begin(), u.dense().end());
        for (std::size_t idx : cells) w[idx] += phi[idx];
        return w;
      }());
      decrease[t] = energy(moved, omega, params) - base;
    }
  }, 8);

  const auto worst = std::min_element(decrease.begin(), decrease.end());
  if (*worst < 0.0) {
    const int t = static_cast<int>(worst - decrease.begin());
    std::vector<double> phi(u.lattice().size());
    result.worst_kind = draw_perturbation(u, cells, seed, t, phi);
    result.worst_decrease = *worst;
    result.witness = ScalarField(perturb, std::move(phi));
  }
  return result;
}

AuditResult minimizer_audit(const ScalarField& u, const Region& omega, const OscParams& params,
                            int trials, std::uint64_t seed) {
  return perturbation_audit(u, omega, erode(omega, params.stencil()), params, trials, seed);
}

std::pair<AuditResult, AuditResult> cut_preservation_check(const ScalarField& u, const Region& omega,
                                                           const OscParams& params, double c,
                                                           int trials, std::uint64_t seed) {
  return {minimizer_audit(pointwise_min(u, c), omega, params, trials, seed),
          minimizer_audit(pointwise_max(u, c), omega, params, trials, seed)};
}

SetMinimality set_minimality(const IndicatorSet& e, const Region& omega, const Region& free_cells,
                             double r) {
  if (!free_cells.subset_of(e.ambient())) throw ValidationError("free cells must lie in the ambient support");
  const std::vector<std::size_t> cells = free_cells.indices();
  if (cells.size() > 20) throw ValidationError("set enumeration limited to 20 free cells");
  SetMinimality out;
  out.per_e = per_r(e, omega, r);
  const Region fixed = e.set() - free_cells;
  const double tol = 1e-12 * std::max(1.0, out.per_e);
  const std::size_t total = std::size_t{1} << cells.size();
  for (std::size_t m = 0; m < total; ++m) {
    std::vector<std::uint8_t> mask = fixed.mask();
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (m >> i & 1) mask[cells[i]] = 1;
    Region f(e.ambient().lattice(), std::move(mask));
    const double d = per_r(IndicatorSet(f, e.ambient()), omega, r) - out.per_e;
    if (d < out.worst_decrease) {
      out.worst_decrease = d;
      if (d < -tol) out.better = f;
    }
  }
  out.subsets = total;
  return out;
}

}  // namespace posc
