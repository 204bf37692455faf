#pragma once

// Lattice geometry, cell regions and ball morphology (dilation, erosion,
// collar) on regular 1-D and 2-D grids.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace posc {

/// Integer cell coordinates; the second component is 0 in 1-D.
using Cell = std::array<int, 2>;

/// Regular grid of `extent[0] x extent[1]` cells with spacing `h`.
/// Cell (i, j) has center `origin + (i, j) * h`. Storage order is row-major
/// with `i` (the x axis) varying fastest.
class Lattice {
 public:
  Lattice() = default;
  Lattice(int dim, double h, std::array<int, 2> extent, std::array<double, 2> origin = {0.0, 0.0});

  /// 1-D lattice of `n` cells whose first center sits at `x0`.
  static Lattice line(double h, int n, double x0 = 0.0);
  /// 2-D lattice of `nx x ny` cells whose (0,0) center sits at `origin`.
  static Lattice plane(double h, int nx, int ny, std::array<double, 2> origin = {0.0, 0.0});

  int dim() const { return dim_; }
  double h() const { return h_; }
  int extent(int axis) const { return extent_[axis]; }
  std::array<double, 2> origin() const { return origin_; }
  std::size_t size() const { return static_cast<std::size_t>(extent_[0]) * extent_[1]; }

  /// h^dim, the measure of one cell.
  double cell_measure() const { return dim_ == 1 ? h_ : h_ * h_; }

  bool contains(Cell c) const {
    return c[0] >= 0 && c[0] < extent_[0] && c[1] >= 0 && c[1] < extent_[1];
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c[1]) * extent_[0] + static_cast<std::size_t>(c[0]);
  }
  Cell cell(std::size_t idx) const {
    return {static_cast<int>(idx % extent_[0]), static_cast<int>(idx / extent_[0])};
  }
  double center(int axis, int i) const { return origin_[axis] + i * h_; }
  std::array<double, 2> center(Cell c) const { return {center(0, c[0]), center(1, c[1])}; }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  int dim_ = 1;
  double h_ = 1.0;
  std::array<int, 2> extent_{1, 1};
  std::array<double, 2> origin_{0.0, 0.0};
};

/// A finite set of lattice cells, stored as a dense membership mask.
class Region {
 public:
  Region() = default;
  /// Empty region on `lattice`.
  explicit Region(const Lattice& lattice);
  Region(const Lattice& lattice, std::vector<std::uint8_t> mask);

  static Region full(const Lattice& lattice);
  /// Cells whose center satisfies `pred(x, y)` (y is 0 in 1-D).
  static Region where(const Lattice& lattice, const std::function<bool(double, double)>& pred);
  /// 1-D cells with centers in the open interval (a, b).
  static Region interval(const Lattice& lattice, double a, double b);
  /// 1-D cells with indices in the closed range [first, last].
  static Region index_range(const Lattice& lattice, int first, int last);
  /// 2-D cells with indices in [i0, i1] x [j0, j1].
  static Region index_box(const Lattice& lattice, Cell lo, Cell hi);

  const Lattice& lattice() const { return lattice_; }
  bool contains(std::size_t idx) const { return mask_[idx] != 0; }
  bool contains(Cell c) const { return lattice_.contains(c) && mask_[lattice_.index(c)] != 0; }
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  /// Linear indices of member cells in increasing order.
  std::vector<std::size_t> indices() const;
  /// Inclusive bounding box of member cells; only valid when non-empty.
  std::array<Cell, 2> bounds() const;

  Region complement() const;
  Region operator&(const Region& other) const;
  Region operator|(const Region& other) const;
  Region operator-(const Region& other) const;
  bool subset_of(const Region& other) const;
  /// Translation by a lattice vector; cells leaving the lattice are an error.
  Region shifted(Cell by) const;

  friend bool operator==(const Region& a, const Region& b) {
    return a.lattice_ == b.lattice_ && a.mask_ == b.mask_;
  }

 private:
  void require_same_lattice(const Region& other) const;

  Lattice lattice_;
  std::vector<std::uint8_t> mask_;
  std::size_t count_ = 0;
};

/// Closed Euclidean index ball { j : |j|_2 <= k }.
class BallStencil {
 public:
  BallStencil(int dim, int k);

  int dim() const { return dim_; }
  int k() const { return k_; }
  const std::vector<Cell>& offsets() const { return offsets_; }
  /// Half-width of the horizontal chord at vertical offset |dy|: floor(sqrt(k^2 - dy^2)).
  int chord_half_width(int dy) const { return half_width_[dy < 0 ? -dy : dy]; }
  /// Physical radius k*h used by every discrete identity.
  double radius(double h) const { return k_ * h; }

 private:
  int dim_;
  int k_;
  std::vector<Cell> offsets_;
  std::vector<int> half_width_;
};

/// Stencil for radius r at spacing h: k = round(r/h). Rejects r < h/2.
BallStencil ball_stencil(double r, double h, int dim);

enum class Overflow {
  reject,  ///< cells pushed outside the lattice are a ValidationError
  clip,    ///< cells pushed outside the lattice are dropped
};

Region dilate(const Region& a, const BallStencil& s, Overflow overflow = Overflow::reject);
/// Morphological erosion, computed as complement(dilate(complement(a))) with
/// clipping; cells beyond the lattice therefore count as members of `a`.
Region erode(const Region& a, const BallStencil& s);
/// Cells of `a` whose whole window lies in `a` and inside the lattice; the
/// largest region on which a field supported on `a` can be evaluated.
Region window_core(const Region& a, const BallStencil& s);
/// omega minus its erosion: the strip where competitors must match the data.
Region collar(const Region& omega, const BallStencil& s);
double measure(const Region& a);

}  // namespace posc
