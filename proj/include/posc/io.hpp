#pragma once

// File formats: `x,value` CSV for 1-D fields, row-major grid CSV for 2-D
// fields, run-length CSV for 1-D regions, ASCII PGM (P2) for 2-D masks and
// images with a JSON sidecar carrying the value scaling.

#include <optional>
#include <string>
#include <vector>

#include "posc/grid.hpp"
#include "posc/oscillation.hpp"

namespace posc::io {

/// Reads `x,value` rows. Spacing comes from `h` when given, otherwise from
/// consecutive x values; every x must sit on the lattice within 1e-6 h.
ScalarField read_field_csv(const std::string& path, std::optional<double> h = std::nullopt);
void write_field_csv(const std::string& path, const ScalarField& u);

/// Row-major grid, one lattice row per line; empty or `nan` entries are off the support.
ScalarField read_grid_csv(const std::string& path, double h, std::array<double, 2> origin = {0.0, 0.0});
void write_grid_csv(const std::string& path, const ScalarField& u);

/// `start,end` inclusive index pairs.
Region read_region_runs(const std::string& path, const Lattice& lattice);
void write_region_runs(const std::string& path, const Region& region);

struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<int> pixels;  ///< row-major, top row first
};

PgmImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const PgmImage& img);

/// value = offset + scale * pixel.
struct PgmScaling {
  double offset = 0.0;
  double scale = 1.0;
  int maxval = 255;
};

/// Sidecar path for an image: `<path>.json`.
std::string sidecar_path(const std::string& pgm_path);
std::optional<PgmScaling> read_sidecar(const std::string& pgm_path);
void write_sidecar(const std::string& pgm_path, const PgmScaling& scaling);

/// Image row j maps to lattice row j; pixel (i, j) is cell (i, j).
Region region_from_pgm(const PgmImage& img, const Lattice& lattice);
PgmImage region_to_pgm(const Region& region);

ScalarField field_from_pgm(const PgmImage& img, const PgmScaling& scaling, const Lattice& lattice);
/// Cells off the support are written as pixel 0. Values are rounded to the
/// nearest representable pixel and clamped to [0, maxval].
PgmImage field_to_pgm(const ScalarField& u, const PgmScaling& scaling);
/// Scaling spanning the field's range with the given maxval.
PgmScaling fit_scaling(const ScalarField& u, int maxval = 65535);

/// Reads a PGM field with its sidecar (identity scaling when absent).
ScalarField read_pgm_field(const std::string& path, double h, std::array<double, 2> origin = {0.0, 0.0});
/// Writes a PGM field and its sidecar.
void write_pgm_field(const std::string& path, const ScalarField& u, const PgmScaling& scaling);

}  // namespace posc::io
