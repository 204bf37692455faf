#pragma once

// One-dimensional structure of Class A minimizers: monotonicity, audits over
// random intervals, the 2r-shift second difference, and the Cx + periodic
// decomposition.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posc/oscillation.hpp"
#include "posc/solver.hpp"

namespace posc {

enum class Monotonicity { nondecreasing, nonincreasing, neither };
std::string to_string(Monotonicity m);

/// Exact scan over the support in index order; constants are nondecreasing.
Monotonicity check_monotone(const ScalarField& u);

struct ClassAAudit {
  double worst_decrease = 0.0;
  int windows = 0;
  /// Interval and witness of the worst decrease, when negative.
  std::optional<Region> worst_window;
  std::optional<ScalarField> witness;
  MoveKind worst_kind = MoveKind::none;
};

/// minimizer_audit on random intervals B with dilate(B) inside the support.
/// The first interval is always the largest admissible one.
ClassAAudit class_a_audit(const ScalarField& u, const OscParams& params, int window_count,
                          int trials, std::uint64_t seed);

/// max over admissible i of |u_{i+2k} - 2 u_i + u_{i-2k}|.
double second_difference_residual(const ScalarField& u, int k);

struct Decomposition {
  double slope = 0.0;        ///< C
  std::vector<double> phase; ///< phi over one period of 2k cells
  double residual = 0.0;     ///< max |u - (C x + phi)|
  double shift_spread = 0.0; ///< max - min of u_{i+2k} - u_i
};

/// Fits u(x) = C x + phi(x) with phi 2k-periodic in cells. Needs at least 4k cells.
Decomposition periodic_decompose(const ScalarField& u, int k);

struct NecessityDemo {
  bool found = false;
  double decrease = 0.0;  ///< energy(u + phi, B) - energy(u, B)
  Region ball;            ///< B
  std::optional<ScalarField> witness;
  MoveKind kind = MoveKind::none;
};

/// Searches perturbations supported on all of B (the largest interval with
/// dilate(B) inside the support) for a strict energy decrease.
NecessityDemo collar_necessity_demo(const ScalarField& u, const OscParams& params, int trials,
                                    std::uint64_t seed);

/// (sum osc)^p / N^{p-1} and sum osc^p over omega; the first never exceeds the second.
std::pair<double, double> jensen_sides(const ScalarField& u, const Region& omega,
                                       const OscParams& params);

}  // namespace posc
