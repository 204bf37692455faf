#include "posc/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "posc/error.hpp"
#include "posc/fixtures.hpp"
#include "posc/io.hpp"
#include "posc/parallel.hpp"
#include "posc/perimeter.hpp"
#include "posc/rigidity.hpp"
#include "posc/solver.hpp"

namespace posc::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Every flag of every subcommand; each subcommand registers the ones it reads.
struct Options {
  std::string field, mask, out, problem, image, set;
  std::string shape = "disk";
  std::string function;
  std::string out_dir = "fixtures";
  std::optional<double> h, r, p, R, step;
  std::vector<double> domain, r_list;
  std::uint64_t seed = 0;
  int iters = 5000;
  int patience = 500;
  int windows = 10;
  int trials = 100;
  double tol = 0.0;
  unsigned threads = 0;
  std::size_t max_levels = 4096;
  bool grid = false;
  bool timing = false;
  bool monotone = false;
  bool no_rounding = false;
};

// ---------------------------------------------------------------- file helpers

std::string extension(const std::string& path) { return fs::path(path).extension().string(); }

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_json(const std::string& path, const json& j) {
  ensure_parent(path);
  std::ofstream f(path);
  if (!f) throw RuntimeError("cannot open output file: " + path);
  f << j.dump(2) << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream f(path);
  if (!f) throw RuntimeError("cannot open output file: " + path);
  f << text;
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open input file: " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

ScalarField load_field(const std::string& path, std::optional<double> h, bool grid,
                       std::array<double, 2> origin = {0.0, 0.0}) {
  if (extension(path) == ".pgm") return io::read_pgm_field(path, h.value_or(1.0), origin);
  if (grid) return io::read_grid_csv(path, h.value_or(1.0), origin);
  return io::read_field_csv(path, h);
}

Region load_mask(const std::string& path, const Lattice& lat) {
  if (extension(path) == ".pgm") return io::region_from_pgm(io::read_pgm(path), lat);
  return io::read_region_runs(path, lat);
}

void write_field(const std::string& path, const ScalarField& u) {
  ensure_parent(path);
  if (u.lattice().dim() == 1) io::write_field_csv(path, u);
  else io::write_grid_csv(path, u);
}

void write_region(const std::string& path, const Region& region) {
  ensure_parent(path);
  if (region.lattice().dim() == 1) io::write_region_runs(path, region);
  else io::write_pgm(path, io::region_to_pgm(region));
}

std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// ---------------------------------------------------------------- shared logic

struct Manifest {
  explicit Manifest(std::string sub) : subcommand(std::move(sub)) {}

  std::string subcommand;
  json inputs = json::object();
  json parameters = json::object();
  std::vector<std::string> outputs;

  void write(const std::string& path) const {
    json j;
    j["tool"] = "posc";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["inputs"] = inputs;
    j["parameters"] = parameters;
    j["outputs"] = outputs;
    write_json(path, j);
  }
};

double require_r(const Options& o) {
  if (!o.r) throw ValidationError("missing --r (window radius)");
  if (!(*o.r > 0.0)) throw ValidationError("--r must be positive");
  return *o.r;
}

Region resolve_omega(const Options& o, const Region& support, const BallStencil& s) {
  const Lattice& lat = support.lattice();
  if (!o.domain.empty() && !o.mask.empty()) throw ValidationError("give either --domain or --mask, not both");
  if (!o.domain.empty()) {
    if (lat.dim() != 1) throw ValidationError("--domain a,b is for 1-D fields; use --mask in 2-D");
    if (!(o.domain[0] < o.domain[1])) throw ValidationError("--domain a,b needs a < b");
    const Region omega = Region::interval(lat, o.domain[0], o.domain[1]);
    if (omega.empty()) throw ValidationError("--domain contains no cell centers");
    return omega;
  }
  if (!o.mask.empty()) return load_mask(o.mask, lat);
  const Region core = window_core(support, s);
  if (core.empty())
    throw ValidationError("field support too small for radius: no cell has its whole window in the support");
  return core;
}

json stencil_json(const OscParams& params, const Lattice& lat) {
  return {{"r", params.r()},
          {"p", params.p()},
          {"h", lat.h()},
          {"k", params.stencil().k()},
          {"effective_r", params.effective_radius(lat.h())}};
}

void common_parameters(Manifest& m, const Options& o) {
  m.parameters["seed"] = o.seed;
  if (o.threads > 0) m.parameters["threads"] = o.threads;
}

// Problem file: {"r", "p", "h", "data", "data_format", "origin", "domain" | "domain_mask"}.
DirichletProblem load_problem(const std::string& path, json& echo) {
  const json j = read_json(path);
  const fs::path dir = fs::path(path).parent_path();
  auto resolve = [&dir](const std::string& p) { return (dir / p).string(); };
  try {
    const double r = j.at("r").get<double>();
    const double p = j.value("p", 1.0);
    std::optional<double> h;
    if (j.contains("h")) h = j.at("h").get<double>();
    const std::string data = resolve(j.at("data").get<std::string>());
    std::string format = j.value("data_format", std::string{});
    if (format.empty()) format = extension(data) == ".pgm" ? "pgm" : (j.value("dim", 1) == 2 ? "grid" : "csv");
    std::array<double, 2> origin{0.0, 0.0};
    if (j.contains("origin")) origin = j.at("origin").get<std::array<double, 2>>();

    ScalarField field;
    if (format == "csv") field = io::read_field_csv(data, h);
    else if (format == "grid") field = io::read_grid_csv(data, h.value_or(1.0), origin);
    else if (format == "pgm") field = io::read_pgm_field(data, h.value_or(1.0), origin);
    else throw ValidationError(path + ": unknown data_format '" + format + "' (csv, grid or pgm)");

    const Lattice& lat = field.lattice();
    Region omega;
    if (j.contains("domain")) {
      const auto d = j.at("domain").get<std::array<double, 2>>();
      if (lat.dim() != 1) throw ValidationError(path + ": 'domain' is for 1-D problems; use 'domain_mask'");
      omega = Region::interval(lat, d[0], d[1]);
    } else if (j.contains("domain_mask")) {
      omega = load_mask(resolve(j.at("domain_mask").get<std::string>()), lat);
    } else {
      throw ValidationError(path + ": problem needs 'domain' [a, b] or 'domain_mask'");
    }
    echo = {{"data", data}, {"data_format", format}, {"r", r}, {"p", p}, {"h", lat.h()}};
    return DirichletProblem(std::move(omega), std::move(field), OscParams(r, p, lat));
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------- subcommands

int run_energy(const Options& o, std::ostream& out) {
  const ScalarField u = load_field(o.field, o.h, o.grid);
  const OscParams params(require_r(o), o.p.value_or(1.0), u.lattice());
  const Region omega = resolve_omega(o, u.support(), params.stencil());
  const OscField f = window_extrema_fast(u, params.stencil(), omega);

  json s = stencil_json(params, u.lattice());
  s["energy"] = energy_from_osc(f, params.p());
  s["cells"] = omega.count();
  s["measure"] = measure(omega);
  if (!o.out.empty()) {
    Manifest m{"energy"};
    m.inputs = {{"field", o.field}};
    if (!o.mask.empty()) m.inputs["mask"] = o.mask;
    m.parameters = stencil_json(params, u.lattice());
    if (!o.domain.empty()) m.parameters["domain"] = o.domain;
    const std::string osc_path = o.out + ".osc.csv";
    write_field(osc_path, ScalarField(omega, f.osc));
    write_json(o.out + ".json", s);
    m.outputs = {osc_path, o.out + ".json"};
    m.write(o.out + ".manifest.json");
  }
  out << s.dump(2) << '\n';
  return 0;
}

int run_solve(const Options& o, std::ostream& out) {
  json echo;
  const DirichletProblem prob = load_problem(o.problem, echo);
  SolverConfig cfg;
  cfg.max_iters = o.iters;
  cfg.step0 = o.step;
  cfg.tol = o.tol;
  cfg.patience = o.patience;
  cfg.seed = o.seed;
  cfg.level_rounding = !o.no_rounding;
  SolveReport rep = solve_subgradient(prob, cfg);

  json report;
  report["initial_energy"] = rep.initial_energy;
  report["final_energy"] = rep.final_energy;
  report["termination"] = to_string(rep.termination);
  report["iterations"] = rep.iterations;
  report["free_cells"] = prob.omega().count();
  report["clamp_bound"] = prob.boundary_sup_norm();
  if (o.timing) report["wall_seconds"] = rep.wall_seconds;

  ScalarField result = rep.field;
  if (o.monotone) {
    const ScalarField theta = truncate_theta(result, prob);
    const ScalarField eta = monotone_envelope(theta, prob);
    const double e = energy(eta, prob.omega(), prob.params());
    report["monotone"] = {{"truncated_energy", energy(theta, prob.omega(), prob.params())},
                          {"envelope_energy", e},
                          {"monotonicity", to_string(check_monotone(eta))}};
    result = eta;
  }

  if (!o.out.empty()) {
    Manifest m{"solve"};
    m.inputs = {{"problem", o.problem}, {"data", echo["data"]}};
    m.parameters = echo;
    m.parameters.erase("data");
    m.parameters["iters"] = o.iters;
    if (o.step) m.parameters["step"] = *o.step;
    m.parameters["tol"] = o.tol;
    m.parameters["patience"] = o.patience;
    m.parameters["level_rounding"] = !o.no_rounding;
    m.parameters["monotone"] = o.monotone;
    common_parameters(m, o);

    const std::string field_path = o.out + ".csv";
    write_field(field_path, result);
    std::ostringstream trace;
    trace << "iteration,energy,best\n";
    for (std::size_t i = 0; i < rep.energy_trace.size(); ++i)
      trace << i << ',' << csv_number(rep.energy_trace[i]) << ',' << csv_number(rep.best_trace[i]) << '\n';
    write_text(o.out + ".trace.csv", trace.str());
    json full = report;
    full["energy_trace"] = rep.energy_trace;
    full["best_trace"] = rep.best_trace;
    write_json(o.out + ".report.json", full);
    m.outputs = {field_path, o.out + ".trace.csv", o.out + ".report.json"};
    m.write(o.out + ".manifest.json");
  }
  out << report.dump(2) << '\n';
  return 0;
}


int run_per(const Options& o, std::ostream& out) {
  Manifest m{"per"};
  m.parameters["shape"] = o.shape;
  std::optional<fixtures::PlanarSet> ps;
  std::optional<double> reference;
  double r = 0.0;
  if (o.shape == "disk") {
    const double R = o.R.value_or(1.0);
    r = o.r.value_or(0.2);
    const double h = o.h.value_or(0.01);
    if (!(R > 0.0 && r > 0.0 && h > 0.0)) throw ValidationError("--R, --r and --h must be positive");
    ps = fixtures::disk(R, r, h);
    reference = 2.0 * std::numbers::pi * R;
    m.parameters["R"] = R;
  } else if (o.shape == "halfspace") {
    r = o.r.value_or(0.25);
    const double h = o.h.value_or(0.005);
    if (!(r > 0.0 && h > 0.0)) throw ValidationError("--r and --h must be positive");
    ps = fixtures::half_line(r, h);
    reference = 1.0;
  } else if (o.shape == "mask") {
    if (o.set.empty()) throw ValidationError("--shape mask needs --set PATH (PGM mask of E)");
    r = require_r(o);
    const io::PgmImage img = io::read_pgm(o.set);
    const Lattice lat = Lattice::plane(o.h.value_or(1.0), img.width, img.height);
    const Region ambient = Region::full(lat);
    Region omega = resolve_omega(o, ambient, ball_stencil(r, lat.h(), 2));
    ps = fixtures::PlanarSet{IndicatorSet(io::region_from_pgm(img, lat), ambient), std::move(omega)};
    m.inputs["set"] = o.set;
    if (!o.mask.empty()) m.inputs["mask"] = o.mask;
  } else {
    throw ValidationError("unknown --shape '" + o.shape + "' (disk, halfspace or mask)");
  }

  const Lattice& lat = ps->set.ambient().lattice();
  const BallStencil stencil = ball_stencil(r, lat.h(), lat.dim());
  const Region band = perimeter_band(ps->set, stencil) & ps->omega;
  json s;
  s["per_r"] = per_r(ps->set, ps->omega, r);
  s["r"] = r;
  s["h"] = lat.h();
  s["k"] = stencil.k();
  s["effective_r"] = stencil.radius(lat.h());
  s["band_measure"] = measure(band);
  if (reference) {
    s["reference"] = *reference;
    s["relative_error"] = std::abs(s["per_r"].get<double>() - *reference) / *reference;
  }
  if (!o.out.empty()) {
    m.parameters["r"] = r;
    m.parameters["h"] = lat.h();
    const std::string band_path = o.out + (lat.dim() == 1 ? ".band.csv" : ".band.pgm");
    write_region(band_path, band);
    write_json(o.out + ".json", s);
    m.outputs = {band_path, o.out + ".json"};
    m.write(o.out + ".manifest.json");
  }
  out << s.dump(2) << '\n';
  return 0;
}

int run_coarea(const Options& o, std::ostream& out) {
  const ScalarField u = load_field(o.field, o.h, o.grid);
  const double r = require_r(o);
  const OscParams params(r, 1.0, u.lattice());
  const Region omega = resolve_omega(o, u.support(), params.stencil());
  const CoareaResult c = coarea_both_sides(u, omega, r, o.max_levels);

  json s = stencil_json(params, u.lattice());
  s.erase("p");
  s["lhs"] = c.lhs;
  s["rhs"] = c.rhs;
  s["residual"] = c.residual();
  s["levels"] = c.profile.thresholds.size();
  if (!o.out.empty()) {
    std::ostringstream table;
    table << "threshold,gap,per_r\n";
    const auto& t = c.profile.thresholds;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double gap = i + 1 < t.size() ? t[i + 1] - t[i] : 0.0;
      table << csv_number(t[i]) << ',' << csv_number(gap) << ',' << csv_number(c.profile.perimeters[i]) << '\n';
    }
    Manifest m{"coarea"};
    m.inputs = {{"field", o.field}};
    if (!o.mask.empty()) m.inputs["mask"] = o.mask;
    m.parameters = stencil_json(params, u.lattice());
    m.parameters.erase("p");
    if (!o.domain.empty()) m.parameters["domain"] = o.domain;
    m.parameters["max_levels"] = o.max_levels;
    write_text(o.out + ".csv", table.str());
    write_json(o.out + ".json", s);
    m.outputs = {o.out + ".csv", o.out + ".json"};
    m.write(o.out + ".manifest.json");
  }
  out << s.dump(2) << '\n';
  return 0;
}

// Built-in profiles for `gamma --function`, with their default domains.
struct Profile {
  std::function<double(double)> fn;
  double a, b;
};

Profile builtin_profile(const std::string& name) {
  if (name == "sin") return {[](double x) { return std::sin(x); }, 0.0, 2.0 * std::numbers::pi};
  if (name == "linear") return {[](double x) { return x; }, -1.0, 1.0};
  if (name == "abs") return {[](double x) { return std::abs(x); }, -1.0, 1.0};
  throw ValidationError("unknown --function '" + name + "' (sin, linear or abs)");
}

int run_gamma(const Options& o, std::ostream& out) {
  std::vector<double> radii = o.r_list;
  if (radii.empty()) radii = {0.2, 0.1, 0.05, 0.02};
  for (double r : radii)
    if (!(r > 0.0)) throw ValidationError("--r-list entries must be positive");
  if (o.field.empty() == o.function.empty()) throw ValidationError("give exactly one of --field or --function");

  ScalarField u;
  Region omega;
  Manifest m{"gamma"};
  if (!o.function.empty()) {
    const Profile prof = builtin_profile(o.function);
    double a = prof.a, b = prof.b;
    if (!o.domain.empty()) {
      a = o.domain[0];
      b = o.domain[1];
    }
    if (!(a < b)) throw ValidationError("--domain a,b needs a < b");
    const double h = o.h.value_or(1e-3);
    if (!(h > 0.0)) throw ValidationError("--h must be positive");
    const double rmax = *std::max_element(radii.begin(), radii.end());
    const int n = static_cast<int>(std::ceil((b - a + 2.0 * rmax) / h)) + 4;
    const Lattice lat = Lattice::line(h, n, a - rmax - 2.0 * h + 0.5 * h);
    u = ScalarField::from_function(Region::full(lat), [&prof](double x, double) { return prof.fn(x); });
    omega = Region::interval(lat, a, b);
    m.parameters = {{"function", o.function}, {"domain", {a, b}}, {"h", h}};
  } else {
    u = load_field(o.field, o.h, o.grid);
    const double rmax = *std::max_element(radii.begin(), radii.end());
    omega = resolve_omega(o, u.support(), ball_stencil(rmax, u.lattice().h(), u.lattice().dim()));
    m.inputs = {{"field", o.field}};
    if (!o.mask.empty()) m.inputs["mask"] = o.mask;
    m.parameters = {{"h", u.lattice().h()}};
    if (!o.domain.empty()) m.parameters["domain"] = o.domain;
  }
  const std::vector<GammaRow> rows = gamma_experiment(u, omega, radii);

  json s;
  s["tv"] = rows.empty() ? 0.0 : rows.front().tv;
  s["rows"] = json::array();
  for (const GammaRow& row : rows)
    s["rows"].push_back({{"r", row.r}, {"effective_r", row.effective_r}, {"normalized_energy", row.normalized_energy}});
  if (!o.out.empty()) {
    std::ostringstream table;
    table << "r,effective_r,normalized_energy,tv\n";
    for (const GammaRow& row : rows)
      table << csv_number(row.r) << ',' << csv_number(row.effective_r) << ',' << csv_number(row.normalized_energy)
            << ',' << csv_number(row.tv) << '\n';
    m.parameters["r_list"] = radii;
    write_text(o.out + ".csv", table.str());
    write_json(o.out + ".json", s);
    m.outputs = {o.out + ".csv", o.out + ".json"};
    m.write(o.out + ".manifest.json");
  }
  out << s.dump(2) << '\n';
  return 0;
}

int run_rigidity(const Options& o, std::ostream& out) {
  const ScalarField u = load_field(o.field, o.h, false);
  if (u.lattice().dim() != 1) throw ValidationError("rigidity checks need a 1-D field");
  const double r = require_r(o);
  const double h = u.lattice().h();
  const double ratio = r / h;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "rigidity needs r to be a whole number of cells, but r/h = " << std::setprecision(12) << ratio
        << "; choose r as a multiple of h = " << h;
    throw ValidationError(msg.str());
  }
  const OscParams params(r, o.p.value_or(1.0), u.lattice());
  const int k = params.stencil().k();
  const auto x_of = [&u](const Region& b) {
    const auto [lo, hi] = b.bounds();
    return json::array({u.lattice().center(0, lo[0]), u.lattice().center(0, hi[0])});
  };

  json s = stencil_json(params, u.lattice());
  s["monotonicity"] = to_string(check_monotone(u));
  const ClassAAudit audit = class_a_audit(u, params, o.windows, o.trials, o.seed);
  s["class_a"] = {{"worst_decrease", audit.worst_decrease},
                  {"windows", audit.windows},
                  {"trials_per_window", o.trials},
                  {"passed", audit.worst_decrease >= -1e-9},
                  {"kind", to_string(audit.worst_kind)}};
  if (audit.worst_window) s["class_a"]["window"] = x_of(*audit.worst_window);
  s["second_difference_residual"] = second_difference_residual(u, k);
  try {
    const Decomposition d = periodic_decompose(u, k);
    s["decomposition"] = {{"C", d.slope}, {"residual", d.residual}, {"shift_spread", d.shift_spread}};
  } catch (const ValidationError& e) {
    s["decomposition"] = nullptr;
    s["decomposition_error"] = e.what();
  }
  const NecessityDemo demo = collar_necessity_demo(u, params, o.trials * o.windows, o.seed);
  s["collar_necessity"] = {{"found", demo.found},
                           {"decrease", demo.decrease},
                           {"kind", to_string(demo.kind)},
                           {"ball", x_of(demo.ball)}};

  if (!o.out.empty()) {
    Manifest m{"rigidity"};
    m.inputs = {{"field", o.field}};
    m.parameters = stencil_json(params, u.lattice());
    m.parameters["windows"] = o.windows;
    m.parameters["trials"] = o.trials;
    common_parameters(m, o);
    write_json(o.out + ".json", s);
    m.outputs = {o.out + ".json"};
    if (demo.witness) {
      write_field(o.out + ".witness.csv", *demo.witness);
      m.outputs.push_back(o.out + ".witness.csv");
    }
    m.write(o.out + ".manifest.json");
  }
  out << s.dump(2) << '\n';
  return 0;
}

int run_inpaint(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ValidationError("inpaint needs --out PREFIX");
  const double h = o.h.value_or(1.0);
  const ScalarField image = io::read_pgm_field(o.image, h);
  const Lattice& lat = image.lattice();
  const Region hole = io::region_from_pgm(io::read_pgm(o.mask), lat);
  if (hole.empty()) throw ValidationError(o.mask + ": the hole mask selects no pixel");
  const OscParams params(o.r.value_or(3.0), o.p.value_or(1.0), lat);
  // Pixels inside the hole are unknown: keep only the surrounding data.
  const ScalarField known(image.support() - hole, std::vector<double>(image.dense().begin(), image.dense().end()));
  const DirichletProblem prob(hole, known, params);

  SolverConfig cfg;
  cfg.max_iters = o.iters;
  cfg.step0 = o.step;
  cfg.tol = o.tol;
  cfg.patience = o.patience;
  cfg.seed = o.seed;
  cfg.level_rounding = !o.no_rounding;
  const SolveReport rep = solve_subgradient(prob, cfg);

  const std::vector<std::size_t> cells = hole.indices();
  std::vector<double> filled;
  for (std::size_t idx : cells) filled.push_back(rep.field.at(idx));
  const ScalarField result = image.with_values(cells, filled);
  const io::PgmScaling scaling = io::read_sidecar(o.image).value_or(io::PgmScaling{0.0, 1.0, io::read_pgm(o.image).maxval});

  json s = stencil_json(params, lat);
  s["hole_pixels"] = hole.count();
  s["initial_energy"] = rep.initial_energy;
  s["final_energy"] = rep.final_energy;
  s["termination"] = to_string(rep.termination);
  s["iterations"] = rep.iterations;
  if (o.timing) s["wall_seconds"] = rep.wall_seconds;

  Manifest m{"inpaint"};
  m.inputs = {{"image", o.image}, {"mask", o.mask}};
  m.parameters = stencil_json(params, lat);
  m.parameters["iters"] = o.iters;
  if (o.step) m.parameters["step"] = *o.step;
  m.parameters["tol"] = o.tol;
  m.parameters["patience"] = o.patience;
  m.parameters["level_rounding"] = !o.no_rounding;
  common_parameters(m, o);
  const std::string pgm = o.out + ".pgm";
  ensure_parent(pgm);
  io::write_pgm_field(pgm, result, scaling);
  json full = s;
  full["energy_trace"] = rep.energy_trace;
  full["best_trace"] = rep.best_trace;
  write_json(o.out + ".report.json", full);
  m.outputs = {pgm, io::sidecar_path(pgm), o.out + ".report.json"};
  m.write(o.out + ".manifest.json");
  out << s.dump(2) << '\n';
  return 0;
}

json problem_json(double r, double p, double h, const std::string& data, std::array<double, 2> domain) {
  return {{"dim", 1}, {"r", r}, {"p", p}, {"h", h}, {"data", data}, {"domain", domain}};
}

int run_fixtures(const Options& o, std::ostream& out) {
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto path = [&](const std::string& name) {
    written.push_back((dir / name).string());
    return written.back();
  };

  // Wide-window problem: u_o = x on (-4, 4), omega = (-1, 1), r = 3.
  const DirichletProblem wide = fixtures::wide_window_problem(1.0);
  io::write_field_csv(path("linear.csv"), wide.data());
  write_json(path("wide_window.json"), problem_json(3.0, 1.0, 0.01, "linear.csv", {-1.0, 1.0}));
  write_json(path("wide_window_p2.json"), problem_json(3.0, 2.0, 0.01, "linear.csv", {-1.0, 1.0}));

  // Hidden-jump problem at two resolutions; data only off omega.
  for (const auto& [name, h] : {std::pair<std::string, double>{"hidden_jump", 0.005}, {"hidden_jump_coarse", 0.25}}) {
    const DirichletProblem prob = fixtures::hidden_jump_problem(h);
    io::write_field_csv(path(name + "_data.csv"), prob.data());
    write_json(path(name + ".json"), problem_json(1.0, 1.0, h, name + "_data.csv", {0.0, 2.0}));
  }

  io::write_field_csv(path("staircase.csv"), fixtures::staircase());

  // Disk R = 1 for r = 0.2 at h = 0.01: the set and the evaluation region.
  const fixtures::PlanarSet disk = fixtures::disk(1.0, 0.2, 0.01);
  io::write_pgm(path("disk.pgm"), io::region_to_pgm(disk.set.set()));
  io::write_pgm(path("disk_omega.pgm"), io::region_to_pgm(disk.omega));

  // Half-line E = {x > 0} for r = 0.25 at h = 0.005, as runs plus lattice description.
  const fixtures::PlanarSet half = fixtures::half_line(0.25, 0.005);
  const Lattice& hl = half.set.ambient().lattice();
  io::write_region_runs(path("halfspace.csv"), half.set.set());
  io::write_region_runs(path("halfspace_omega.csv"), half.omega);
  write_json(path("halfspace.json"), {{"h", hl.h()},
                                      {"cells", hl.extent(0)},
                                      {"x0", hl.origin()[0]},
                                      {"r", 0.25},
                                      {"set", "halfspace.csv"},
                                      {"omega", "halfspace_omega.csv"}});

  // Inpainting scene with a hole over both edges.
  const fixtures::InpaintScene scene = fixtures::inpaint_scene();
  io::write_pgm_field(path("scene.pgm"), scene.image, io::PgmScaling{0.0, 0.1, 10});
  written.push_back(io::sidecar_path((dir / "scene.pgm").string()));
  io::write_pgm(path("scene_hole.pgm"), io::region_to_pgm(scene.hole));

  Manifest m{"fixtures"};
  m.parameters = {{"out_dir", o.out_dir}};
  m.outputs = written;
  m.write((dir / "manifest.json").string());
  out << json({{"out_dir", o.out_dir}, {"files", written}}).dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- flags

void add_out(CLI::App* sub, Options& o, const char* what) {
  sub->add_option("--out", o.out, std::string("Output prefix: ") + what);
}

void add_field(CLI::App* sub, Options& o, bool required) {
  auto* opt = sub->add_option("--field", o.field,
                              "Field file: 1-D 'x,value' CSV, 2-D grid CSV (with --grid) or PGM");
  if (required) opt->required();
  sub->add_flag("--grid", o.grid, "Read a CSV field as a row-major 2-D grid");
  sub->add_option("--h", o.h, "Cell spacing (inferred from x for 1-D CSV; default 1 for grids)");
}

void add_region(CLI::App* sub, Options& o) {
  sub->add_option("--domain", o.domain, "1-D domain omega = (a, b) as a,b")->delimiter(',')->expected(2);
  sub->add_option("--mask", o.mask, "Omega as a PGM mask (2-D) or a start,end runs CSV (1-D)");
}

void add_solver(CLI::App* sub, Options& o) {
  sub->add_option("--iters", o.iters, "Maximum iterations")->check(CLI::NonNegativeNumber);
  sub->add_option("--step", o.step, "Initial step a0 in a0/sqrt(t+1)");
  sub->add_option("--tol", o.tol, "Stop when the best energy improves by <= tol over --patience iterations");
  sub->add_option("--patience", o.patience, "Window for the --tol stall test (0 disables it)");
  sub->add_flag("--no-rounding", o.no_rounding, "Disable p = 1 level-set rounding");
  sub->add_flag("--report-timing", o.timing, "Include wall time in the report (breaks byte-identity)");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"posc: p-oscillation energies, nonlocal perimeters and their minimizers on grids"};
  app.name("posc");
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* energy_cmd = app.add_subcommand("energy", "Evaluate E_{r,p}(u, omega)");
  add_field(energy_cmd, o, true);
  add_region(energy_cmd, o);
  energy_cmd->add_option("--r", o.r, "Window radius")->required();
  energy_cmd->add_option("--p", o.p, "Exponent p >= 1 (default 1)");
  add_out(energy_cmd, o, "writes PREFIX.osc.csv (oscillation per cell), PREFIX.json, PREFIX.manifest.json");

  auto* solve_cmd = app.add_subcommand("solve", "Minimize E_{r,p} with Dirichlet data by projected subgradient descent");
  solve_cmd->add_option("--problem", o.problem, "Problem JSON (see docs/formats.md)")->required();
  add_solver(solve_cmd, o);
  solve_cmd->add_flag("--monotone", o.monotone,
                      "1-D: replace the result by its truncated monotone envelope (nondecreasing data)");
  add_out(solve_cmd, o, "writes PREFIX.csv, PREFIX.trace.csv, PREFIX.report.json, PREFIX.manifest.json");

  auto* per_cmd = app.add_subcommand("per", "Nonlocal perimeter Per_r(E, omega)");
  per_cmd->add_option("--shape", o.shape, "disk | halfspace | mask")->check(CLI::IsMember({"disk", "halfspace", "mask"}));
  per_cmd->add_option("--R", o.R, "Disk radius (default 1)");
  per_cmd->add_option("--r", o.r, "Window radius (default 0.2 disk, 0.25 halfspace)");
  per_cmd->add_option("--h", o.h, "Cell spacing (default 0.01 disk, 0.005 halfspace, 1 mask)");
  per_cmd->add_option("--set", o.set, "PGM mask of E for --shape mask");
  per_cmd->add_option("--mask", o.mask, "PGM mask of omega for --shape mask (default: every full window)");
  add_out(per_cmd, o, "writes PREFIX.band.pgm|csv, PREFIX.json, PREFIX.manifest.json");

  auto* coarea_cmd = app.add_subcommand("coarea", "Check E_{r,1}(u) = 2r * sum_i gap_i * Per_r({u > s_i})");
  add_field(coarea_cmd, o, true);
  add_region(coarea_cmd, o);
  coarea_cmd->add_option("--r", o.r, "Window radius")->required();
  coarea_cmd->add_option("--max-levels", o.max_levels, "Reject fields with more distinct values than this");
  add_out(coarea_cmd, o, "writes PREFIX.csv, PREFIX.json, PREFIX.manifest.json");
  coarea_cmd->footer(
      "PREFIX.csv columns: threshold (sorted distinct value s_i), gap (s_{i+1} - s_i, 0 for the last),\n"
      "per_r (Per_r({u > s_i}, omega)).");

  auto* gamma_cmd = app.add_subcommand("gamma", "Normalized energies E_{r,1}/(2r) against discrete TV as r decreases");
  add_field(gamma_cmd, o, false);
  add_region(gamma_cmd, o);
  gamma_cmd->add_option("--function", o.function, "Built-in profile: sin (0,2pi) | linear (-1,1) | abs (-1,1)");
  gamma_cmd->add_option("--r-list", o.r_list, "Radii, comma separated (default 0.2,0.1,0.05,0.02)")->delimiter(',');
  add_out(gamma_cmd, o, "writes PREFIX.csv, PREFIX.json, PREFIX.manifest.json");
  gamma_cmd->footer(
      "PREFIX.csv columns: r (requested), effective_r (k*h), normalized_energy (E_{r,1}/(2kh)),\n"
      "tv (discrete total variation over omega).");

  auto* rigidity_cmd = app.add_subcommand("rigidity", "1-D structure report: monotonicity, audits, 2r-periodicity");
  rigidity_cmd->add_option("--field", o.field, "1-D 'x,value' CSV")->required();
  rigidity_cmd->add_option("--h", o.h, "Cell spacing (inferred from x by default)");
  rigidity_cmd->add_option("--r", o.r, "Window radius; r/h must be an integer")->required();
  rigidity_cmd->add_option("--p", o.p, "Exponent p >= 1 (default 1)");
  rigidity_cmd->add_option("--windows", o.windows, "Random intervals audited")->check(CLI::PositiveNumber);
  rigidity_cmd->add_option("--trials", o.trials, "Perturbations per interval")->check(CLI::NonNegativeNumber);
  add_out(rigidity_cmd, o, "writes PREFIX.json, PREFIX.witness.csv (when found), PREFIX.manifest.json");

  auto* inpaint_cmd = app.add_subcommand("inpaint", "Fill a PGM hole by minimizing E_{r,p} with the surrounding pixels fixed");
  inpaint_cmd->add_option("--image", o.image, "PGM image (scaling from IMAGE.json when present)")->required();
  inpaint_cmd->add_option("--mask", o.mask, "PGM mask of the hole")->required();
  inpaint_cmd->add_option("--r", o.r, "Window radius in pixels*h (default 3)");
  inpaint_cmd->add_option("--p", o.p, "Exponent p >= 1 (default 1)");
  inpaint_cmd->add_option("--h", o.h, "Pixel spacing (default 1)");
  add_solver(inpaint_cmd, o);
  add_out(inpaint_cmd, o, "writes PREFIX.pgm, PREFIX.pgm.json, PREFIX.report.json, PREFIX.manifest.json (required)");

  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write the reference problems, sets and images");
  fixtures_cmd->add_option("--out-dir", o.out_dir, "Directory to write into (default ./fixtures)");

  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--seed", o.seed, "Seed for randomized solvers and audits");
    sub->add_option("--threads", o.threads, "Cap on worker threads (0 = hardware)");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    err << "run 'posc --help' or 'posc <subcommand> --help' for usage\n";
    return 2;
  }

  try {
    if (o.threads > 0) set_max_threads(o.threads);
    if (energy_cmd->parsed()) return run_energy(o, out);
    if (solve_cmd->parsed()) return run_solve(o, out);
    if (per_cmd->parsed()) return run_per(o, out);
    if (coarea_cmd->parsed()) return run_coarea(o, out);
    if (gamma_cmd->parsed()) return run_gamma(o, out);
    if (rigidity_cmd->parsed()) return run_rigidity(o, out);
    if (inpaint_cmd->parsed()) return run_inpaint(o, out);
    if (fixtures_cmd->parsed()) return run_fixtures(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace posc::cli
