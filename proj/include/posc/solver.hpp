#pragma once

// Dirichlet problem for the p-oscillation energy: projected subgradient
// solver, exhaustive small-instance oracle, 1-D truncation/envelope
// constructions, and randomized minimality audits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posc/grid.hpp"
#include "posc/oscillation.hpp"
#include "posc/perimeter.hpp"

namespace posc {

/// Free cells omega, data on dilate(omega); collar values are the boundary
/// condition and interior data values, if any, seed the initialization.
class DirichletProblem {
 public:
  DirichletProblem(Region omega, ScalarField data, OscParams params);

  const Region& omega() const { return omega_; }
  const ScalarField& data() const { return data_; }
  const OscParams& params() const { return params_; }
  /// dilate(omega) \ omega: cells carrying the boundary condition.
  const Region& boundary() const { return boundary_; }
  /// True when the data field also covers omega.
  bool has_interior_data() const { return omega_.subset_of(data_.support()); }
  /// Sorted distinct values of the data on the boundary.
  std::vector<double> boundary_levels() const;
  /// max |u_o| over the boundary.
  double boundary_sup_norm() const;
  /// Field on dilate(omega): data on the boundary, `interior` on omega.
  ScalarField assemble(std::span<const double> interior) const;

 private:
  Region omega_;
  ScalarField data_;
  OscParams params_;
  Region boundary_;
};

struct SolverConfig {
  int max_iters = 5000;
  /// a0 in a_t = a0 / sqrt(t + 1); defaults to a quarter of the boundary data range.
  std::optional<double> step0;
  /// Stop once the best energy improved by no more than `tol` over `patience` iterations.
  double tol = 0.0;
  int patience = 500;
  std::uint64_t seed = 0;
  /// Box [-M, M] for the iterates; defaults to max |u_o| on the boundary.
  std::optional<double> clamp_bound;
  /// For p = 1: periodically replace the best iterate by its level-set
  /// rounding onto the boundary levels (never increases the energy).
  bool level_rounding = true;
  int rounding_every = 25;
  /// Cap on thresholds tried per level gap during rounding.
  std::size_t rounding_candidates = 256;
};

enum class Termination { max_iters, stalled, zero_energy, zero_subgradient, no_free_cells };
std::string to_string(Termination t);

struct SolveReport {
  ScalarField field;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  std::vector<double> energy_trace;  ///< energy of the iterate, per iteration
  std::vector<double> best_trace;    ///< best energy so far, per iteration
  Termination termination = Termination::max_iters;
  int iterations = 0;
  double wall_seconds = 0.0;
};

/// Initial iterate: interior data when present, otherwise the boundary mean.
ScalarField initial_field(const DirichletProblem& prob);

SolveReport solve_subgradient(const DirichletProblem& prob, const SolverConfig& cfg = {});

/// Coarea rounding for p = 1: the field on dilate(omega) whose level sets in
/// each gap (l_i, l_{i+1}) of `levels` are the best level set of `u` in that gap.
/// Its energy never exceeds that of u clamped to [l_0, l_m].
ScalarField level_rounding(const DirichletProblem& prob, const ScalarField& u,
                           const std::vector<double>& levels, std::size_t max_candidates = 0,
                           std::uint64_t seed = 0);

struct OracleResult {
  ScalarField field;
  double energy = 0.0;
};

/// Exact minimum over assignments of the free cells to `levels` (sorted,
/// distinct). Lexicographically smallest minimizer in cell order. At most 16
/// free cells and 5 levels; for p = 1 the levels must include every boundary value.
OracleResult brute_force_oracle(const DirichletProblem& prob, const std::vector<double>& levels);

/// min{u, u_o(b)} inside omega = (a, b), unchanged on the collar. 1-D,
/// nondecreasing boundary data.
ScalarField truncate_theta(const ScalarField& u, const DirichletProblem& prob);

/// Running maximum from the left end of dilate(omega); requires u already truncated.
ScalarField monotone_envelope(const ScalarField& u, const DirichletProblem& prob);

enum class MoveKind { none, gaussian, spike, cut_min, cut_max, flatten };
std::string to_string(MoveKind k);

struct AuditResult {
  /// min over trials of energy(u + phi) - energy(u); 0 when no trial decreased.
  double worst_decrease = 0.0;
  MoveKind worst_kind = MoveKind::none;
  /// The perturbation phi achieving worst_decrease, when negative.
  std::optional<ScalarField> witness;
  int trials = 0;
};

/// Random perturbations supported in `perturb` (a subset of omega).
AuditResult perturbation_audit(const ScalarField& u, const Region& omega, const Region& perturb,
                               const OscParams& params, int trials, std::uint64_t seed);

/// Minimality audit with perturbations supported in erode(omega).
AuditResult minimizer_audit(const ScalarField& u, const Region& omega, const OscParams& params,
                            int trials, std::uint64_t seed);

/// Audits of min{u, c} and max{u, c}.
std::pair<AuditResult, AuditResult> cut_preservation_check(const ScalarField& u, const Region& omega,
                                                           const OscParams& params, double c,
                                                           int trials, std::uint64_t seed);

struct SetMinimality {
  double per_e = 0.0;            ///< Per_r(E, omega)
  double worst_decrease = 0.0;   ///< min over F of Per_r(F, omega) - Per_r(E, omega), capped at 0
  std::size_t subsets = 0;       ///< competitors enumerated
  std::optional<Region> better;  ///< a competitor with strictly smaller perimeter
};

/// Exhaustive check that E minimizes Per_r(., omega) among sets F agreeing
/// with E outside `free_cells`. At most 20 free cells.
SetMinimality set_minimality(const IndicatorSet& e, const Region& omega, const Region& free_cells,
                             double r);

}  // namespace posc
