#include "posc/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "posc/error.hpp"

namespace posc::io {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot open output file: " + path);
  out << std::setprecision(17);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  std::ostringstream msg;
  msg << path << ":" << line << ": malformed number '" << text << "'";
  throw ValidationError(msg.str());
}

bool is_comment_or_blank(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

}  // namespace

ScalarField read_field_csv(const std::string& path, std::optional<double> h) {
  std::ifstream in = open_in(path);
  std::string line;
  std::vector<std::pair<double, double>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw ValidationError(path + ":" + std::to_string(lineno) + ": expected 'x,value'");
    if (rows.empty() && trim(parts[0]) == "x") continue;  // header
    rows.emplace_back(parse_double(trim(parts[0]), path, lineno), parse_double(trim(parts[1]), path, lineno));
  }
  if (rows.empty()) throw ValidationError(path + ": no data rows");
  std::sort(rows.begin(), rows.end());
  double spacing = h.value_or(0.0);
  if (!h) {
    if (rows.size() < 2) throw ValidationError(path + ": cannot infer spacing from a single row; pass --h");
    spacing = rows[1].first - rows[0].first;
    // Refine over the whole span; neighbouring rows alone lose digits.
    const double steps = std::round((rows.back().first - rows.front().first) / spacing);
    if (spacing > 0.0 && steps > 1.0) spacing = (rows.back().first - rows.front().first) / steps;
  }
  if (!(spacing > 0.0)) throw ValidationError(path + ": nonpositive or duplicate x spacing");
  const double x0 = rows.front().first;
  std::vector<int> index(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double t = (rows[i].first - x0) / spacing;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-6) throw ValidationError(path + ": x values are not on a uniform grid");
    index[i] = static_cast<int>(r);
    if (i > 0 && index[i] == index[i - 1]) throw ValidationError(path + ": duplicate x value");
  }
  const Lattice lat = Lattice::line(spacing, index.back() + 1, x0);
  std::vector<std::uint8_t> mask(lat.size(), 0);
  std::vector<double> values(lat.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    mask[index[i]] = 1;
    values[index[i]] = rows[i].second;
  }
  return ScalarField(Region(lat, std::move(mask)), std::move(values));
}

void write_field_csv(const std::string& path, const ScalarField& u) {
  if (u.lattice().dim() != 1) throw ValidationError("x,value CSV is for 1-D fields");
  std::ofstream out = open_out(path);
  out << "x,value\n";
  for (std::size_t idx : u.support().indices())
    out << u.lattice().center(0, static_cast<int>(idx)) << ',' << u.at(idx) << '\n';
}

ScalarField read_grid_csv(const std::string& path, double h, std::array<double, 2> origin) {
  std::ifstream in = open_in(path);
  std::string line;
  std::vector<std::vector<std::optional<double>>> grid;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    std::vector<std::optional<double>> row;
    for (const auto& raw : split(line, ',')) {
      const std::string t = trim(raw);
      if (t.empty() || t == "nan" || t == "NaN") row.emplace_back();
      else row.emplace_back(parse_double(t, path, lineno));
    }
    if (!grid.empty() && row.size() != grid.front().size())
      throw ValidationError(path + ":" + std::to_string(lineno) + ": ragged grid row");
    grid.push_back(std::move(row));
  }
  if (grid.empty()) throw ValidationError(path + ": empty grid");
  const Lattice lat = Lattice::plane(h, static_cast<int>(grid.front().size()), static_cast<int>(grid.size()), origin);
  std::vector<std::uint8_t> mask(lat.size(), 0);
  std::vector<double> values(lat.size(), 0.0);
  for (int j = 0; j < lat.extent(1); ++j)
    for (int i = 0; i < lat.extent(0); ++i) {
      const auto& v = grid[j][i];
      if (!v) continue;
      mask[lat.index({i, j})] = 1;
      values[lat.index({i, j})] = *v;
    }
  return ScalarField(Region(lat, std::move(mask)), std::move(values));
}

void write_grid_csv(const std::string& path, const ScalarField& u) {
  const Lattice& lat = u.lattice();
  std::ofstream out = open_out(path);
  for (int j = 0; j < lat.extent(1); ++j) {
    for (int i = 0; i < lat.extent(0); ++i) {
      if (i > 0) out << ',';
      const std::size_t idx = lat.index({i, j});
      if (u.support().contains(idx)) out << u.at(idx);
      else out << "nan";
    }
    out << '\n';
  }
}

Region read_region_runs(const std::string& path, const Lattice& lattice) {
  if (lattice.dim() != 1) throw ValidationError("run-length regions are 1-D");
  std::ifstream in = open_in(path);
  std::string line;
  Region region(lattice);
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw ValidationError(path + ":" + std::to_string(lineno) + ": expected 'start,end'");
    if (trim(parts[0]) == "start") continue;
    const double a = parse_double(trim(parts[0]), path, lineno);
    const double b = parse_double(trim(parts[1]), path, lineno);
    if (a != std::floor(a) || b != std::floor(b) || b < a)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": runs need integer start <= end");
    region = region | Region::index_range(lattice, static_cast<int>(a), static_cast<int>(b));
  }
  return region;
}

void write_region_runs(const std::string& path, const Region& region) {
  if (region.lattice().dim() != 1) throw ValidationError("run-length regions are 1-D");
  std::ofstream out = open_out(path);
  out << "start,end\n";
  const int n = region.lattice().extent(0);
  int i = 0;
  while (i < n) {
    if (!region.contains(static_cast<std::size_t>(i))) {
      ++i;
      continue;
    }
    const int start = i;
    while (i < n && region.contains(static_cast<std::size_t>(i))) ++i;
    out << start << ',' << i - 1 << '\n';
  }
}

PgmImage read_pgm(const std::string& path) {
  std::ifstream in = open_in(path);
  // Tokenize, dropping '#' comments.
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
  }
  if (tokens.size() < 4 || tokens[0] != "P2") throw ValidationError(path + ": not an ASCII PGM (P2) file");
  PgmImage img;
  try {
    img.width = std::stoi(tokens[1]);
    img.height = std::stoi(tokens[2]);
    img.maxval = std::stoi(tokens[3]);
  } catch (const std::exception&) {
    throw ValidationError(path + ": malformed PGM header");
  }
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535)
    throw ValidationError(path + ": invalid PGM dimensions or maxval");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (tokens.size() != 4 + n) throw ValidationError(path + ": PGM pixel count does not match header");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int v = 0;
    try {
      v = std::stoi(tokens[4 + i]);
    } catch (const std::exception&) {
      throw ValidationError(path + ": malformed PGM pixel");
    }
    if (v < 0 || v > img.maxval) throw ValidationError(path + ": PGM pixel out of range");
    img.pixels[i] = v;
  }
  return img;
}

void write_pgm(const std::string& path, const PgmImage& img) {
  std::ofstream out = open_out(path);
  out << "P2\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) {
      if (i > 0) out << ' ';
      out << img.pixels[static_cast<std::size_t>(j) * img.width + i];
    }
    out << '\n';
  }
}

std::string sidecar_path(const std::string& pgm_path) { return pgm_path + ".json"; }

std::optional<PgmScaling> read_sidecar(const std::string& pgm_path) {
  std::ifstream in(sidecar_path(pgm_path));
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    PgmScaling s;
    s.offset = j.at("offset").get<double>();
    s.scale = j.at("scale").get<double>();
    s.maxval = j.at("maxval").get<int>();
    return s;
  } catch (const std::exception& e) {
    throw ValidationError(sidecar_path(pgm_path) + ": malformed scaling sidecar: " + e.what());
  }
}

void write_sidecar(const std::string& pgm_path, const PgmScaling& scaling) {
  std::ofstream out = open_out(sidecar_path(pgm_path));
  nlohmann::json j;
  j["offset"] = scaling.offset;
  j["scale"] = scaling.scale;
  j["maxval"] = scaling.maxval;
  out << j.dump(2) << '\n';
}

Region region_from_pgm(const PgmImage& img, const Lattice& lattice) {
  if (lattice.dim() != 2 || lattice.extent(0) != img.width || lattice.extent(1) != img.height)
    throw ValidationError("mask size does not match the lattice");
  std::vector<std::uint8_t> mask(lattice.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = 2 * img.pixels[i] > img.maxval;
  return Region(lattice, std::move(mask));
}

PgmImage region_to_pgm(const Region& region) {
  const Lattice& lat = region.lattice();
  if (lat.dim() != 2) throw ValidationError("PGM masks are 2-D");
  PgmImage img{lat.extent(0), lat.extent(1), 255, std::vector<int>(lat.size())};
  for (std::size_t i = 0; i < lat.size(); ++i) img.pixels[i] = region.contains(i) ? 255 : 0;
  return img;
}

ScalarField field_from_pgm(const PgmImage& img, const PgmScaling& scaling, const Lattice& lattice) {
  if (lattice.dim() != 2 || lattice.extent(0) != img.width || lattice.extent(1) != img.height)
    throw ValidationError("image size does not match the lattice");
  std::vector<double> v(lattice.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = scaling.offset + scaling.scale * img.pixels[i];
  return ScalarField(Region::full(lattice), std::move(v));
}

PgmImage field_to_pgm(const ScalarField& u, const PgmScaling& scaling) {
  const Lattice& lat = u.lattice();
  if (lat.dim() != 2) throw ValidationError("PGM fields are 2-D");
  if (!(scaling.scale != 0.0)) throw ValidationError("PGM scaling must be nonzero");
  PgmImage img{lat.extent(0), lat.extent(1), scaling.maxval, std::vector<int>(lat.size(), 0)};
  for (std::size_t idx : u.support().indices()) {
    const double t = std::round((u.at(idx) - scaling.offset) / scaling.scale);
    img.pixels[idx] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(scaling.maxval)));
  }
  return img;
}

PgmScaling fit_scaling(const ScalarField& u, int maxval) {
  const double lo = u.min_value();
  const double hi = u.max_value();
  PgmScaling s;
  s.maxval = maxval;
  s.offset = lo;
  s.scale = hi > lo ? (hi - lo) / maxval : 1.0;
  return s;
}

ScalarField read_pgm_field(const std::string& path, double h, std::array<double, 2> origin) {
  const PgmImage img = read_pgm(path);
  const PgmScaling scaling = read_sidecar(path).value_or(PgmScaling{0.0, 1.0, img.maxval});
  return field_from_pgm(img, scaling, Lattice::plane(h, img.width, img.height, origin));
}

void write_pgm_field(const std::string& path, const ScalarField& u, const PgmScaling& scaling) {
  write_pgm(path, field_to_pgm(u, scaling));
  write_sidecar(path, scaling);
}

}  // namespace posc::io
