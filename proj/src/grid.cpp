#include "posc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "posc/error.hpp"
#include "posc/parallel.hpp"

namespace posc {

Lattice::Lattice(int dim, double h, std::array<int, 2> extent, std::array<double, 2> origin)
    : dim_(dim), h_(h), extent_(extent), origin_(origin) {
  if (dim != 1 && dim != 2) throw ValidationError("lattice dimension must be 1 or 2");
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("lattice spacing h must be positive");
  if (extent[0] <= 0 || extent[1] <= 0) throw ValidationError("lattice extents must be nonempty");
  if (dim == 1 && extent[1] != 1) throw ValidationError("1-D lattice must have a single row");
  if (dim == 1) origin_[1] = 0.0;
}

Lattice Lattice::line(double h, int n, double x0) { return Lattice(1, h, {n, 1}, {x0, 0.0}); }

Lattice Lattice::plane(double h, int nx, int ny, std::array<double, 2> origin) {
  return Lattice(2, h, {nx, ny}, origin);
}

Region::Region(const Lattice& lattice) : lattice_(lattice), mask_(lattice.size(), 0) {}

Region::Region(const Lattice& lattice, std::vector<std::uint8_t> mask)
    : lattice_(lattice), mask_(std::move(mask)) {
  if (mask_.size() != lattice_.size()) throw ValidationError("region mask size does not match lattice");
  for (auto& m : mask_) {
    m = m ? 1 : 0;
    count_ += m;
  }
}

Region Region::full(const Lattice& lattice) {
  return Region(lattice, std::vector<std::uint8_t>(lattice.size(), 1));
}

Region Region::where(const Lattice& lattice, const std::function<bool(double, double)>& pred) {
  std::vector<std::uint8_t> mask(lattice.size(), 0);
  for (std::size_t idx = 0; idx < mask.size(); ++idx) {
    const auto x = lattice.center(lattice.cell(idx));
    mask[idx] = pred(x[0], x[1]) ? 1 : 0;
  }
  return Region(lattice, std::move(mask));
}

Region Region::interval(const Lattice& lattice, double a, double b) {
  if (lattice.dim() != 1) throw ValidationError("interval regions are 1-D only");
  return where(lattice, [a, b](double x, double) { return x > a && x < b; });
}

Region Region::index_range(const Lattice& lattice, int first, int last) {
  if (lattice.dim() != 1) throw ValidationError("index ranges are 1-D only");
  return index_box(lattice, {first, 0}, {last, 0});
}

Region Region::index_box(const Lattice& lattice, Cell lo, Cell hi) {
  Region r(lattice);
  for (int j = lo[1]; j <= hi[1]; ++j)
    for (int i = lo[0]; i <= hi[0]; ++i) {
      if (!lattice.contains({i, j})) throw ValidationError("index box exceeds lattice extents");
      r.mask_[lattice.index({i, j})] = 1;
      ++r.count_;
    }
  return r;
}

std::vector<std::size_t> Region::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (std::size_t idx = 0; idx < mask_.size(); ++idx)
    if (mask_[idx]) out.push_back(idx);
  return out;
}

std::array<Cell, 2> Region::bounds() const {
  Cell lo{lattice_.extent(0), lattice_.extent(1)};
  Cell hi{-1, -1};
  for (std::size_t idx = 0; idx < mask_.size(); ++idx) {
    if (!mask_[idx]) continue;
    const Cell c = lattice_.cell(idx);
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  return {lo, hi};
}

void Region::require_same_lattice(const Region& other) const {
  if (!(lattice_ == other.lattice_)) throw ValidationError("regions live on different lattices");
}

Region Region::complement() const {
  std::vector<std::uint8_t> m(mask_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask_[i] ? 0 : 1;
  return Region(lattice_, std::move(m));
}

Region Region::operator&(const Region& other) const {
  require_same_lattice(other);
  std::vector<std::uint8_t> m(mask_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask_[i] & other.mask_[i];
  return Region(lattice_, std::move(m));
}

Region Region::operator|(const Region& other) const {
  require_same_lattice(other);
  std::vector<std::uint8_t> m(mask_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask_[i] | other.mask_[i];
  return Region(lattice_, std::move(m));
}

Region Region::operator-(const Region& other) const {
  require_same_lattice(other);
  std::vector<std::uint8_t> m(mask_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask_[i] & (other.mask_[i] ^ 1);
  return Region(lattice_, std::move(m));
}

bool Region::subset_of(const Region& other) const {
  require_same_lattice(other);
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i] && !other.mask_[i]) return false;
  return true;
}

Region Region::shifted(Cell by) const {
  Region r(lattice_);
  for (std::size_t idx = 0; idx < mask_.size(); ++idx) {
    if (!mask_[idx]) continue;
    Cell c = lattice_.cell(idx);
    c[0] += by[0];
    c[1] += by[1];
    if (!lattice_.contains(c)) throw ValidationError("shifted region leaves the lattice");
    r.mask_[lattice_.index(c)] = 1;
  }
  r.count_ = count_;
  return r;
}

BallStencil::BallStencil(int dim, int k) : dim_(dim), k_(k) {
  if (dim != 1 && dim != 2) throw ValidationError("stencil dimension must be 1 or 2");
  if (k < 1) throw ValidationError("radius below resolution");
  half_width_.resize(k + 1);
  for (int dy = 0; dy <= k; ++dy) {
    int w = static_cast<int>(std::floor(std::sqrt(static_cast<double>(k * k - dy * dy))));
    // guard the floating sqrt against off-by-one at perfect squares
    while ((w + 1) * (w + 1) + dy * dy <= k * k) ++w;
    while (w * w + dy * dy > k * k) --w;
    half_width_[dy] = w;
  }
  const int ky = dim == 2 ? k : 0;
  for (int dy = -ky; dy <= ky; ++dy) {
    const int w = half_width_[dy < 0 ? -dy : dy];
    for (int dx = -w; dx <= w; ++dx) offsets_.push_back({dx, dy});
  }
}

BallStencil ball_stencil(double r, double h, int dim) {
  if (!(h > 0.0)) throw ValidationError("spacing h must be positive");
  if (!(r > 0.0)) throw ValidationError("radius r must be positive");
  if (r < 0.5 * h) {
    std::ostringstream msg;
    msg << "radius below resolution: r=" << r << " < h/2=" << 0.5 * h;
    throw ValidationError(msg.str());
  }
  return BallStencil(dim, static_cast<int>(std::lround(r / h)));
}

Region dilate(const Region& a, const BallStencil& s, Overflow overflow) {
  const Lattice& lat = a.lattice();
  if (s.dim() != lat.dim()) throw ValidationError("stencil and lattice dimensions differ");
  if (a.empty()) return Region(lat);
  const int k = s.k();
  const int nx = lat.extent(0);
  const int ny = lat.extent(1);
  if (overflow == Overflow::reject) {
    // The ball contains the axis offsets (+-k, 0) and (0, +-k), so any
    // overflow shows up on the bounding box.
    const auto [lo, hi] = a.bounds();
    const int ky = lat.dim() == 2 ? k : 0;
    if (lo[0] - k < 0 || hi[0] + k >= nx || lo[1] - ky < 0 || hi[1] + ky >= ny)
      throw ValidationError("domain too small for radius");
  }

  // Per-row prefix counts; a chord of half-width w hits a row segment iff the
  // segment count is positive.
  std::vector<int> prefix(static_cast<std::size_t>(nx + 1) * ny, 0);
  for (int j = 0; j < ny; ++j) {
    int* p = &prefix[static_cast<std::size_t>(j) * (nx + 1)];
    for (int i = 0; i < nx; ++i) p[i + 1] = p[i] + a.contains(lat.index({i, j}));
  }

  std::vector<std::uint8_t> out(lat.size(), 0);
  const int ky = lat.dim() == 2 ? k : 0;
  parallel_for(static_cast<std::size_t>(ny), [&](std::size_t jb, std::size_t je) {
    for (int j = static_cast<int>(jb); j < static_cast<int>(je); ++j) {
      for (int dy = -ky; dy <= ky; ++dy) {
        const int src = j - dy;
        if (src < 0 || src >= ny) continue;
        const int w = s.chord_half_width(dy);
        const int* p = &prefix[static_cast<std::size_t>(src) * (nx + 1)];
        if (p[nx] == 0) continue;
        std::uint8_t* row = &out[static_cast<std::size_t>(j) * nx];
        for (int i = 0; i < nx; ++i) {
          if (row[i]) continue;
          const int lo = std::max(i - w, 0);
          const int hi = std::min(i + w, nx - 1);
          if (p[hi + 1] - p[lo] > 0) row[i] = 1;
        }
      }
    }
  }, 16);
  return Region(lat, std::move(out));
}

Region erode(const Region& a, const BallStencil& s) {
  return dilate(a.complement(), s, Overflow::clip).complement();
}

Region window_core(const Region& a, const BallStencil& s) {
  const Lattice& lat = a.lattice();
  const int k = s.k();
  Region inner = erode(a, s);
  if (lat.extent(0) <= 2 * k || (lat.dim() == 2 && lat.extent(1) <= 2 * k)) return Region(lat);
  const Cell hi{lat.extent(0) - 1 - k, lat.dim() == 2 ? lat.extent(1) - 1 - k : 0};
  const Cell lo{k, lat.dim() == 2 ? k : 0};
  return inner & Region::index_box(lat, lo, hi);
}

Region collar(const Region& omega, const BallStencil& s) { return omega - erode(omega, s); }

double measure(const Region& a) { return static_cast<double>(a.count()) * a.lattice().cell_measure(); }

}  // namespace posc
