// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "instances.hpp"
#include "oracles.hpp"
#include "posc/fixtures.hpp"
#include "posc/perimeter.hpp"
#include "posc/rigidity.hpp"
#include "posc/solver.hpp"

using namespace posc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

bool near_rel(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

// 1. Wide-window fixture: energy 2*6^p, audited, fast.
void wide_window(Outcome& o) {
  for (double p : {1.0, 2.0}) {
    const double want = 2.0 * std::pow(6.0, p);
    const DirichletProblem prob = fixtures::wide_window_problem(p);

    // Data-seeded start, and a start scrambled across the whole clamp box.
    std::mt19937_64 rng(11);
    const Region omega = prob.omega();
    std::vector<double> noise(omega.count());
    std::uniform_real_distribution<double> d(-4.0, 4.0);
    for (double& v : noise) v = d(rng);
    const std::vector<std::size_t> cells = omega.indices();
    const ScalarField scrambled = prob.data().with_values(cells, noise);
    const DirichletProblem scrambled_prob(omega, scrambled, prob.params());

    for (const DirichletProblem* pr : {&prob, &scrambled_prob}) {
      const auto t0 = Clock::now();
      SolverConfig cfg;
      cfg.seed = 1;
      const SolveReport rep = solve_subgradient(*pr, cfg);
      const double dt = seconds_since(t0);
      const AuditResult audit = minimizer_audit(rep.field, omega, pr->params(), 1000, 5);
      const char* start = pr == &prob ? "data" : "scrambled";
      o.detail << " p=" << p << "/" << start << ": E=" << rep.final_energy << " (init "
               << rep.initial_energy << ", " << rep.iterations << " it, " << dt
               << " s) audit=" << audit.worst_decrease << ";";
      o.require(near_rel(rep.final_energy, want, 0.02), "energy within 2% of 2*6^p");
      o.require(audit.worst_decrease >= -1e-6, "audit decrease >= -1e-6");
      o.require(dt < 10.0, "runtime < 10 s");
    }
  }
}

// 2. Hidden-jump fixture: r/2 at h = 0.005, exact discrete optimum at h = r/4.
void hidden_jump(Outcome& o) {
  const DirichletProblem fine = fixtures::hidden_jump_problem(0.005);
  SolverConfig cfg;
  cfg.seed = 2;
  const SolveReport rep = solve_subgradient(fine, cfg);
  o.detail << " h=0.005: E=" << rep.final_energy << ";";
  o.require(near_rel(rep.final_energy, 0.5, 0.02), "solver energy within 2% of r/2");

  const DirichletProblem coarse = fixtures::hidden_jump_problem(0.25);
  const OracleResult orc = brute_force_oracle(coarse, {0.0, 1.0});
  const int k = coarse.params().stencil().k();
  const double enumerated =
      oracle::exhaustive_min(initial_field(coarse), coarse.omega(), k, 1.0, {0.0, 1.0});
  o.detail << " h=r/4: " << coarse.omega().count() << " free cells, oracle=" << orc.energy
           << " exhaustive=" << enumerated << ";";
  o.require(coarse.omega().count() == 8, "8 free cells at h = r/4");
  o.require(orc.energy == enumerated, "oracle equals independent 2^8 enumeration");
  o.require(std::abs(orc.energy - 0.5) <= 1e-12, "discrete optimum r/2");
}

// 3. Coarea identity on 50 random finite-valued fields.
void coarea(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const bool two_d = t % 2 == 1;
    const int nlev = 3 + t % 4;
    std::vector<double> levels;
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    for (int i = 0; i < nlev; ++i) levels.push_back(d(rng));
    const Lattice lat = two_d ? Lattice::plane(0.05, 64, 48) : Lattice::line(0.01, 400);
    const int k = two_d ? 2 + t % 5 : 1 + t % 12;
    const Region all = Region::full(lat);
    const ScalarField u = oracle::random_levels(all, levels, rng);
    const Region omega = oracle::core(lat, k);
    const CoareaResult c = coarea_both_sides(u, omega, k * lat.h());
    worst = std::max(worst, std::abs(c.lhs - c.rhs) / std::max(1.0, c.lhs));
  }
  const double dt = seconds_since(t0);
  o.detail << " worst scaled residual " << worst << ", " << dt << " s;";
  o.require(worst <= 1e-12, "|lhs - rhs| <= 1e-12 max(1, lhs)");
  o.require(dt < 5.0, "runtime < 5 s");
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// 4. Fast and naive engines agree bit for bit.
void engines(Outcome& o) {
  std::mt19937_64 rng(4);
  struct Case {
    int dim, k;
  };
  const Case cases[] = {{1, 1}, {1, 3}, {1, 7}, {2, 2}, {2, 5}};
  int fields = 0, mismatches = 0;
  for (const Case& c : cases) {
    for (int t = 0; t < 20; ++t) {
      const Lattice lat = c.dim == 1 ? Lattice::line(0.1, 200 + t) : Lattice::plane(0.1, 40 + t, 33);
      const BallStencil s(c.dim, c.k);
      const Region all = Region::full(lat);
      const ScalarField u = t % 3 == 0 ? oracle::random_levels(all, {-1.0, 0.0, 2.5}, rng)
                                       : oracle::random_field(all, rng);
      // Alternate between the full core and a scattered evaluation set.
      Region eval = oracle::core(lat, c.k);
      if (t % 2 == 1) eval = eval & oracle::random_region(lat, 0.3, rng);
      const OscField a = window_extrema_naive(u, s, eval);
      const OscField b = window_extrema_fast(u, s, eval);
      ++fields;
      if (!(a.eval == b.eval) || !same_bits(a.sup, b.sup) || !same_bits(a.inf, b.inf) ||
          !same_bits(a.osc, b.osc))
        ++mismatches;
    }
  }
  o.detail << " " << fields << " fields, " << mismatches << " mismatches;";
  o.require(fields == 100 && mismatches == 0, "bit-identical on all fields");
}

// 5. Solver reaches the oracle energy on tiny p = 1 instances.
void oracle_equivalence(Outcome& o) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int below = 0;
  for (int t = 0; t < 25; ++t) {
    const instances::Tiny inst = instances::tiny(rng, 1 + t % 2, 12, 4, 1.0, t % 3 == 0);
    const OracleResult orc = brute_force_oracle(inst.prob, inst.levels);
    SolverConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    const SolveReport rep = solve_subgradient(inst.prob, cfg);
    worst = std::max(worst, std::abs(rep.final_energy - orc.energy));
    if (rep.final_energy < orc.energy - 1e-9) ++below;
  }
  o.detail << " worst |E_solver - E_oracle| = " << worst << ", solver below oracle: " << below << ";";
  o.require(worst <= 1e-6, "within 1e-6 of the oracle");
  o.require(below == 0, "oracle is a lower bound");
}

// 6. Level sets of oracle minimizers minimize the perimeter in erode(omega).
void level_set_minimality(Outcome& o) {
  std::mt19937_64 rng(6);
  int sets = 0, violations = 0;
  std::size_t enumerated = 0, largest = 0;
  for (int t = 0; t < 10; ++t) {
    const instances::Tiny inst = instances::tiny(rng, 1 + t % 2, 14, 4, 1.0, false);
    const OracleResult orc = brute_force_oracle(inst.prob, inst.levels);
    const Region& omega = inst.prob.omega();
    const Region free_cells = erode(omega, inst.prob.params().stencil());
    std::vector<double> values;
    for (std::size_t i : orc.field.support().indices()) values.push_back(orc.field.at(i));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const SetMinimality m = set_minimality(level_set(orc.field, values[i]), omega, free_cells,
                                             inst.prob.params().r());
      ++sets;
      enumerated += m.subsets;
      largest = std::max(largest, m.subsets);
      violations += m.better.has_value();
    }
  }
  o.detail << " " << sets << " level sets, " << enumerated << " competitors (max " << largest
           << " per set), " << violations << " violations;";
  o.require(largest <= (1u << 14), "enumeration <= 2^14 per set");
  o.require(violations == 0, "zero violations");
}

ScalarField field_on(const Lattice& lat, const std::function<double(double)>& f) {
  return ScalarField::from_function(Region::full(lat), [&f](double x, double) { return f(x); });
}

// 7. Class A audits: monotone passes at p = 1, the 2r-periodic family at p > 1, |x| fails.
void class_a(Outcome& o) {
  const double r = 1.0, h = 0.02;
  const Lattice lat = fixtures::cell_centered_line(-4.0, 4.0, h);
  std::mt19937_64 rng(7);
  const int windows = 10, trials = 100;
  double worst_pass = 0.0;

  auto audit = [&](const ScalarField& u, double p, std::uint64_t seed) {
    return class_a_audit(u, OscParams(r, p, lat), windows, trials, seed).worst_decrease;
  };

  for (int s = 0; s < 5; ++s) {
    std::vector<double> jumps, heights;
    std::uniform_real_distribution<double> pos(-3.5, 3.5), up(0.1, 2.0);
    const int n = 3 + s;
    for (int i = 0; i < n; ++i) {
      jumps.push_back(pos(rng));
      heights.push_back(up(rng));
    }
    const ScalarField u = field_on(lat, [&](double x) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += x > jumps[i] ? heights[i] : 0.0;
      return v;
    });
    const double d = audit(u, 1.0, 70 + s);
    o.require(check_monotone(u) == Monotonicity::nondecreasing, "staircase is monotone");
    o.require(d >= -1e-9, "staircase passes at p=1");
    worst_pass = std::min(worst_pass, d);
  }
  const ScalarField lin = field_on(lat, [](double x) { return x; });
  const ScalarField wavy =
      field_on(lat, [r](double x) { return x + 0.1 * std::sin(std::numbers::pi * x / r); });
  o.require(check_monotone(wavy) == Monotonicity::nondecreasing, "x + 0.1 sin is monotone");
  {
    const double d = audit(lin, 1.0, 75);
    o.require(d >= -1e-9, "u=x passes at p=1");
    worst_pass = std::min(worst_pass, d);
  }
  for (double p : {1.5, 2.0}) {
    const double a = audit(lin, p, 76);
    const double b = audit(wavy, p, 77);
    o.require(a >= -1e-9, "u=x passes at p>1");
    o.require(b >= -1e-9, "x + 0.1 sin(pi x/r) passes at p>1");
    worst_pass = std::min({worst_pass, a, b});
  }
  const ClassAAudit vee =
      class_a_audit(field_on(lat, [](double x) { return std::abs(x); }), OscParams(r, 1.0, lat),
                    windows, trials, 78);
  o.detail << " worst passing decrease " << worst_pass << "; |x| decrease " << vee.worst_decrease
           << " via " << to_string(vee.worst_kind) << ";";
  o.require(vee.worst_decrease < 0.0 && vee.witness.has_value(), "|x| fails with a witness");
}

// 8. Cx + periodic structure.
void periodic_structure(Outcome& o) {
  const double h = 1.0 / 50.0;
  const int k = 50;  // r = 1
  const Lattice lat = fixtures::cell_centered_line(-4.0, 4.0, h);
  const ScalarField wavy =
      field_on(lat, [](double x) { return x + 0.1 * std::sin(std::numbers::pi * x); });
  const Decomposition d = periodic_decompose(wavy, k);
  const double sd = second_difference_residual(wavy, k);
  const Decomposition cubic = periodic_decompose(field_on(lat, [](double x) { return x * x * x; }), k);
  o.detail << " C-1=" << d.slope - 1.0 << " residual=" << d.residual << " second-diff=" << sd
           << " cubic residual=" << cubic.residual << ";";
  o.require(std::abs(d.slope - 1.0) <= 1e-10, "C = 1 +- 1e-10");
  o.require(d.residual <= 1e-10, "residual <= 1e-10");
  o.require(sd <= 1e-12, "second difference <= 1e-12");
  o.require(cubic.residual > 0.1, "x^3 residual > 0.1");
}

// 9. Disk and half-line perimeters.
void perimeter_geometry(Outcome& o) {
  const fixtures::PlanarSet disk = fixtures::disk(1.0, 0.2, 0.01);
  const double pd = per_r(disk.set, disk.omega, 0.2);
  const fixtures::PlanarSet half = fixtures::half_line(0.25, 0.005);
  const double ph = per_r(half.set, half.omega, 0.25);
  o.detail << " disk " << pd << " (2pi " << 2.0 * std::numbers::pi << "), half-line " << ph << ";";
  o.require(near_rel(pd, 2.0 * std::numbers::pi, 0.02), "disk within 2% of 2 pi");
  o.require(std::abs(ph - 1.0) <= 2.0 * 0.005 / (2.0 * 0.25), "half-line within 2h/(2r) of 1");
}

// 10. Normalized energies of sin approach TV = 4.
void gamma_limit(Outcome& o) {
  const double h = 1e-3, rmax = 0.2;
  const double two_pi = 2.0 * std::numbers::pi;
  const int n = static_cast<int>(std::ceil((two_pi + 2.0 * rmax) / h)) + 4;
  const Lattice lat = Lattice::line(h, n, -rmax - 2.0 * h + 0.5 * h);
  const ScalarField u = field_on(lat, [](double x) { return std::sin(x); });
  const Region omega = Region::interval(lat, 0.0, two_pi);
  const auto rows = gamma_experiment(u, omega, {0.2, 0.1, 0.05, 0.02});
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    o.detail << " r=" << rows[i].r << ":" << rows[i].normalized_energy;
    if (i > 0 && !(std::abs(rows[i].normalized_energy - 4.0) < std::abs(rows[i - 1].normalized_energy - 4.0)))
      monotone = false;
  }
  o.detail << " (discrete TV " << rows.back().tv << ");";
  o.require(monotone, "monotone approach to 4");
  o.require(near_rel(rows.back().normalized_energy, 4.0, 0.05), "final value within 5% of 4");
}

// 11. The collar constraint matters: a unit step is beaten on the full ball only.
void collar_necessity(Outcome& o) {
  const Lattice lat = fixtures::cell_centered_line(-2.0, 2.0, 0.02);
  const ScalarField step = field_on(lat, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
  const OscParams params(0.5, 1.0, lat);
  const NecessityDemo demo = collar_necessity_demo(step, params, 1000, 11);
  const AuditResult audit = minimizer_audit(step, demo.ball, params, 1000, 12);
  o.detail << " full-ball decrease " << demo.decrease << " via " << to_string(demo.kind)
           << "; collar-excluded audit " << audit.worst_decrease << ";";
  o.require(demo.found && demo.decrease < 0.0 && demo.witness.has_value(), "strict-improvement witness");
  o.require(audit.worst_decrease >= -1e-9, "collar-excluded audit passes");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    void (*run)(Outcome&);
  };
  const Criterion criteria[] = {
      {1, "wide-window fixture energy 2*6^p", wide_window},
      {2, "hidden-jump fixture energy r/2", hidden_jump},
      {3, "coarea identity", coarea},
      {4, "engine equivalence", engines},
      {5, "oracle equivalence", oracle_equivalence},
      {6, "level-set perimeter minimality", level_set_minimality},
      {7, "class A audits", class_a},
      {8, "Cx + periodic structure", periodic_structure},
      {9, "perimeter geometry", perimeter_geometry},
      {10, "gamma-limit illustration", gamma_limit},
      {11, "collar necessity", collar_necessity},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s %2d %s (%.2f s):%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0),
                o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
