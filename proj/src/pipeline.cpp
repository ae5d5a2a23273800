#include "dbareit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "dbareit/cgo_boundary.hpp"
#include "dbareit/dn_map.hpp"

namespace dbareit {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using nlohmann::ordered_json;

namespace {

Complex parse_complex_text(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  double re = 0.0;
  double im = 0.0;
  if (!(is >> re)) throw Error("config: cannot parse complex value for " + key);
  is >> im;
  return {re, im};
}

std::string complex_text(Complex v) {
  std::ostringstream os;
  os.precision(17);
  os << v.real() << " " << v.imag();
  return os.str();
}

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  if (!tree.get_child_optional(key)) return fallback;
  try {
    return tree.get<T>(key);
  } catch (const pt::ptree_error&) {
    throw Error("config: invalid value for " + key);
  }
}

RunConfig from_tree(const pt::ptree& t) {
  static const std::vector<std::string> kKnown = {
      "phantom.preset", "phantom.file", "phantom.constant_value",
      "mesh.radius", "mesh.target_triangles",
      "electrodes.count", "electrodes.width", "electrodes.contact_impedance",
      "electrodes.amplitude",
      "noise.eta", "noise.seed",
      "scattering.K", "scattering.n", "scattering.truncation",
      "scattering.truncation_radius", "scattering.odd_m", "scattering.trace_rule",
      "scattering.g0_sign",
      "dbar.nz", "dbar.z_extent", "dbar.tol", "dbar.restart", "dbar.max_iter",
      "run.workers", "run.output",
      "reconstruction.background"};
  for (const auto& [section, body] : t) {
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (std::find(kKnown.begin(), kKnown.end(), full) == kKnown.end()) {
        throw Error("config: unknown key " + full);
      }
    }
  }

  RunConfig c;
  c.preset = get<std::string>(t, "phantom.preset", c.preset);
  c.phantom_file = get<std::string>(t, "phantom.file", "");
  c.constant_value = parse_complex_text(
      get<std::string>(t, "phantom.constant_value", "1 0"), "phantom.constant_value");
  c.radius = get(t, "mesh.radius", c.radius);
  c.target_triangles = get(t, "mesh.target_triangles", c.target_triangles);
  c.layout.count = get(t, "electrodes.count", c.layout.count);
  c.layout.width = get(t, "electrodes.width", c.layout.width);
  c.layout.contact_impedance =
      parse_complex_text(get<std::string>(t, "electrodes.contact_impedance", "0.0057"),
                         "electrodes.contact_impedance");
  c.amplitude = get(t, "electrodes.amplitude", c.amplitude);
  c.eta = get(t, "noise.eta", c.eta);
  c.seed = get<std::uint64_t>(t, "noise.seed", c.seed);
  c.k_cutoff = get(t, "scattering.K", c.k_cutoff);
  c.k_points = get(t, "scattering.n", c.k_points);
  const auto mode = get<std::string>(t, "scattering.truncation", "square");
  const double tr = get(t, "scattering.truncation_radius", c.k_cutoff);
  if (mode == "square") {
    c.truncation = Truncation::square(tr);
  } else if (mode == "disk") {
    c.truncation = Truncation::disk(tr);
  } else {
    throw Error("config: scattering.truncation must be square or disk");
  }
  c.odd_m = get(t, "scattering.odd_m", c.odd_m);
  c.trace_rule = parse_trace_rule(
      get<std::string>(t, "scattering.trace_rule", trace_rule_name(c.trace_rule)));
  c.g0_sign = parse_g0_sign(get<std::string>(t, "scattering.g0_sign", g0_sign_name(c.g0_sign)));
  c.nz = get(t, "dbar.nz", c.nz);
  c.z_extent = get(t, "dbar.z_extent", c.z_extent);
  c.dbar.tol = get(t, "dbar.tol", c.dbar.tol);
  c.dbar.restart = get(t, "dbar.restart", c.dbar.restart);
  c.dbar.max_iter = get(t, "dbar.max_iter", c.dbar.max_iter);
  c.workers = get(t, "run.workers", c.workers);
  c.output = get<std::string>(t, "run.output", c.output.string());
  c.background = get<std::string>(t, "reconstruction.background", c.background);
  c.validate();
  return c;
}

void apply_overrides(pt::ptree& t, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq ||
        o.find('.', dot + 1) < eq) {
      throw Error("override must look like section.key=value: " + o);
    }
    t.put(o.substr(0, eq), o.substr(eq + 1));
  }
}

class Stopwatch {
 public:
  Stopwatch(StageTimings* t, std::string name) : t_(t), name_(std::move(name)) {}
  ~Stopwatch() {
    if (!t_) return;
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
    t_->emplace_back(name_, d.count());
  }

 private:
  StageTimings* t_;
  std::string name_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <typename F>
auto stage(const std::string& name, StageTimings* timings, F&& f) {
  Stopwatch sw(timings, name);
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

ordered_json complex_json(Complex v) { return ordered_json::array({v.real(), v.imag()}); }

ordered_json extremum_json(const Extremum& e, const std::vector<std::pair<std::string, Mask>>& masks,
                           const SquareGrid& g) {
  ordered_json j;
  j["value"] = e.value;
  j["z"] = complex_json(e.z);
  j["pixel"] = {e.ix, e.iy};
  ordered_json in = ordered_json::array();
  for (const auto& [name, m] : masks) {
    if (m[g.index(e.ix, e.iy)]) in.push_back(name);
  }
  j["regions"] = in;
  return j;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

void RunConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Error(std::string("config: ") + name + " must be positive");
  };
  positive(radius, "mesh.radius");
  positive(target_triangles, "mesh.target_triangles");
  positive(layout.width, "electrodes.width");
  positive(amplitude, "electrodes.amplitude");
  positive(k_cutoff, "scattering.K");
  positive(truncation.radius, "scattering.truncation_radius");
  positive(odd_m, "scattering.odd_m");
  positive(z_extent, "dbar.z_extent");
  positive(dbar.tol, "dbar.tol");
  positive(dbar.restart, "dbar.restart");
  positive(dbar.max_iter, "dbar.max_iter");
  positive(workers, "run.workers");
  if (eta < 0.0) throw Error("config: noise.eta must be nonnegative");
  if (k_points < 2) throw Error("config: scattering.n must be at least 2");
  if (nz < 3) throw Error("config: dbar.nz must be at least 3");
  if (truncation.mode == Truncation::Mode::kSquare && truncation.radius > k_cutoff) {
    throw Error("config: square truncation exceeds the k-grid");
  }
  if (truncation.radius > k_cutoff * std::sqrt(2.0)) {
    throw Error("config: truncation radius exceeds the k-grid");
  }
  if (background != "auto" && background != "fit") {
    const Complex g = parse_complex_text(background, "reconstruction.background");
    if (!(g.real() > 0.0)) throw Error("config: background must have positive real part");
  }
  layout.validate(radius);
}

AdmittivityField RunConfig::phantom() const {
  if (!phantom_file.empty()) return load_phantom(phantom_file);
  if (preset == "constant") return constant_field(constant_value, radius);
  const auto p = parse_chest_preset(preset);
  if (!p) throw Error("config: unknown phantom preset '" + preset + "'");
  return chest_phantom(*p, radius);
}

RunConfig RunConfig::load(const fs::path& path, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ptree_error& e) {
    throw Error("cannot read config: " + std::string(e.what()));
  }
  apply_overrides(tree, overrides);
  RunConfig c = from_tree(tree);
  // Relative phantom files resolve against the config's directory.
  if (!c.phantom_file.empty() && c.phantom_file.is_relative() &&
      !fs::exists(c.phantom_file)) {
    c.phantom_file = path.parent_path() / c.phantom_file;
  }
  return c;
}

RunConfig RunConfig::from_overrides(const std::vector<std::string>& overrides) {
  pt::ptree tree;
  apply_overrides(tree, overrides);
  return from_tree(tree);
}

std::string RunConfig::to_ini(bool with_output) const {
  std::ostringstream os;
  os.precision(17);
  os << "[phantom]\npreset = " << preset << "\n";
  if (!phantom_file.empty()) os << "file = " << phantom_file.string() << "\n";
  os << "constant_value = " << complex_text(constant_value) << "\n";
  os << "\n[mesh]\nradius = " << radius << "\ntarget_triangles = " << target_triangles << "\n";
  os << "\n[electrodes]\ncount = " << layout.count << "\nwidth = " << layout.width
     << "\ncontact_impedance = " << complex_text(layout.contact_impedance)
     << "\namplitude = " << amplitude << "\n";
  os << "\n[noise]\neta = " << eta << "\nseed = " << seed << "\n";
  os << "\n[scattering]\nK = " << k_cutoff << "\nn = " << k_points << "\ntruncation = "
     << (truncation.mode == Truncation::Mode::kDisk ? "disk" : "square")
     << "\ntruncation_radius = " << truncation.radius << "\nodd_m = " << odd_m
     << "\ntrace_rule = " << trace_rule_name(trace_rule)
     << "\ng0_sign = " << g0_sign_name(g0_sign) << "\n";
  os << "\n[dbar]\nnz = " << nz << "\nz_extent = " << z_extent << "\ntol = " << dbar.tol
     << "\nrestart = " << dbar.restart << "\nmax_iter = " << dbar.max_iter << "\n";
  os << "\n[run]\nworkers = " << workers << "\n";
  if (with_output) os << "output = " << output.string() << "\n";
  os << "\n[reconstruction]\nbackground = " << background << "\n";
  return os.str();
}

StageError::StageError(std::string stage, const std::string& what)
    : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

SimulationOutput simulate(const RunConfig& cfg, const fs::path& out, StageTimings* timings) {
  cfg.validate();
  SimulationOutput sim;
  const AdmittivityField field = stage("phantom", timings, [&] { return cfg.phantom(); });
  if (std::abs(field.domain_radius() - cfg.radius) > 1e-12) {
    throw StageError("phantom", "phantom domain radius differs from mesh.radius");
  }
  sim.mesh = stage("mesh", timings, [&] {
    return build_disk_mesh(cfg.radius, cfg.target_triangles, cfg.layout);
  });
  sim.currents = pattern_matrix(trig_patterns(cfg.layout.count, cfg.amplitude));
  stage("forward", timings, [&] {
    const CemSolver gamma(sim.mesh, field, cfg.layout);
    sim.voltages_gamma = gamma.electrode_voltages(sim.currents);
    const CemSolver one(sim.mesh, constant_field(1.0, cfg.radius), cfg.layout);
    sim.voltages_one = one.electrode_voltages(sim.currents);
    // Noise models measurement error on the unknown body only; the reference
    // map is computed, not measured.
    if (cfg.eta > 0.0) sim.voltages_gamma = add_noise(sim.voltages_gamma, cfg.eta, cfg.seed);
    return 0;
  });
  stage("dn", timings, [&] {
    sim.dn_gamma = build_dn(sim.currents, sim.voltages_gamma, cfg.radius);
    sim.dn_one = build_dn(sim.currents, sim.voltages_one, cfg.radius);
    return 0;
  });
  if (!out.empty()) {
    stage("write", timings, [&] {
      fs::create_directories(out);
      save_phantom(field, out / "phantom.ini");
      save_mesh(sim.mesh, out / "mesh.txt");
      save_voltages_csv(sim.voltages_gamma, out / "voltages_gamma.csv");
      save_voltages_csv(sim.voltages_one, out / "voltages_one.csv");
      save_dn_csv(sim.dn_gamma, out / "dn_gamma.csv");
      save_dn_csv(sim.dn_one, out / "dn_one.csv");
      return 0;
    });
  }
  return sim;
}

Complex fit_background(const DNMatrix& dn_gamma, const DNMatrix& dn_one) {
  const Complex num = (dn_one.entries.conjugate().cwiseProduct(dn_gamma.entries)).sum();
  const double den = dn_one.entries.squaredNorm();
  if (!(den > 0.0)) throw Error("reference DN matrix is zero");
  return num / den;
}

ReconstructionOutput reconstruct(const RunConfig& cfg, const DNMatrix& dn_gamma,
                                 const DNMatrix& dn_one, StageTimings* timings) {
  cfg.validate();
  ReconstructionOutput r;
  const DeltaDN delta = stage("dn", timings, [&] {
    DNMatrix g = dn_gamma.radius_scaled ? dn_gamma : scale_to_unit_disk(dn_gamma, dn_gamma.radius);
    const DNMatrix one =
        dn_one.radius_scaled ? dn_one : scale_to_unit_disk(dn_one, dn_one.radius);
    if (cfg.background == "auto") {
      r.background = cfg.phantom().background();
    } else if (cfg.background == "fit") {
      r.background = fit_background(g, one);
    } else {
      r.background = parse_complex_text(cfg.background, "reconstruction.background");
    }
    if (!g.background_scaled) g = scale_background(g, r.background);
    return DeltaDN(g, one);
  });

  const CGOTraceSet traces = stage("traces", timings, [&] {
    return compute_traces(delta, KGrid::make(cfg.k_cutoff, cfg.k_points), cfg.workers,
                          BoundaryOptions{cfg.trace_rule, cfg.g0_sign});
  });
  if (!std::any_of(traces.valid.begin(), traces.valid.end(), [](auto v) { return v != 0; })) {
    throw StageError("traces", "boundary integral system is singular (rcond " +
                                   std::to_string(traces.rcond) + ")");
  }

  r.scattering = stage("scattering", timings, [&] {
    ScatteringData s = compute_s(traces);
    s = truncate(s, cfg.truncation, &r.truncation_report);
    s = to_odd_grid(s, cfg.odd_m);
    TruncationReport odd_report;
    s = truncate(s, cfg.truncation, &odd_report);
    r.truncation_report.zeroed_nonfinite += odd_report.zeroed_nonfinite;
    return s;
  });

  r.dbar = stage("dbar", timings, [&] {
    return solve_all_z(r.scattering, SquareGrid{cfg.nz, cfg.z_extent}, cfg.dbar, cfg.workers,
                       cfg.z_extent);
  });
  if (!r.dbar.failures.empty()) {
    const DbarFailure& f = r.dbar.failures.front();
    throw StageError("dbar", std::to_string(r.dbar.failures.size()) +
                                 " z-point(s) did not converge; first at z = " +
                                 std::to_string(f.z.real()) + " + " + std::to_string(f.z.imag()) +
                                 "i, residual " + std::to_string(f.residual));
  }

  stage("reconstruct", timings, [&] {
    r.q = compute_q(m_plus_minus(r.dbar.field));
    const ComplexField loggamma = cauchy_transform_loggamma(r.q, QBranch::kQ21);
    r.recon = finalize(r.q.grid, loggamma, r.background);
    return 0;
  });
  return r;
}

void write_reconstruction(const RunConfig& cfg, const ReconstructionOutput& r,
                          const fs::path& out) {
  fs::create_directories(out);
  save_scattering_csv(r.scattering.source, out / "scattering.csv");
  save_scattering_csv(*r.scattering.odd, out / "scattering_odd.csv");
  save_m_fields(r.dbar.field, out / "m_fields.bin");
  const ReconResult& rec = r.recon;
  save_grid_csv(rec.grid, rec.sigma, out / "sigma.csv");
  save_grid_csv(rec.grid, rec.epsilon, out / "epsilon.csv");

  const AdmittivityField truth = cfg.phantom();
  save_ppm(rec.grid, rec.sigma, out / "sigma.ppm", field_min(rec.grid, rec.sigma, rec.inside).value,
           field_max(rec.grid, rec.sigma, rec.inside).value);
  save_ppm(rec.grid, rec.epsilon, out / "epsilon.ppm",
           field_min(rec.grid, rec.epsilon, rec.inside).value,
           field_max(rec.grid, rec.epsilon, rec.inside).value);

  std::vector<std::pair<std::string, Mask>> masks;
  for (const auto& region : truth.regions()) {
    masks.emplace_back(region.name, region_mask(truth, region.name, rec.grid));
  }

  ordered_json report;
  report["phantom"] = cfg.phantom_file.empty() ? cfg.preset : cfg.phantom_file.string();
  report["background"] = complex_json(r.background);

  ordered_json dr;
  const double ts_hi = truth.max_real(), ts_lo = truth.min_real();
  const double te_hi = truth.max_imag(), te_lo = truth.min_imag();
  if (ts_hi > ts_lo) {
    dr["sigma"] = dynamic_range(rec.sigma, rec.inside, ts_hi, ts_lo);
  } else {
    dr["sigma"] = nullptr;
    dr["sigma_note"] = "undefined: constant true conductivity";
  }
  if (te_hi > te_lo) {
    dr["epsilon"] = dynamic_range(rec.epsilon, rec.inside, te_hi, te_lo);
  } else {
    dr["epsilon"] = nullptr;
    dr["epsilon_note"] = "undefined: constant true permittivity";
  }
  report["dynamic_range_percent"] = dr;

  ordered_json ex;
  ex["sigma_max"] = extremum_json(field_max(rec.grid, rec.sigma, rec.inside), masks, rec.grid);
  ex["sigma_min"] = extremum_json(field_min(rec.grid, rec.sigma, rec.inside), masks, rec.grid);
  ex["epsilon_max"] = extremum_json(field_max(rec.grid, rec.epsilon, rec.inside), masks, rec.grid);
  ex["epsilon_min"] = extremum_json(field_min(rec.grid, rec.epsilon, rec.inside), masks, rec.grid);
  report["extrema"] = ex;

  ordered_json regions = ordered_json::object();
  for (const auto& [name, m] : masks) {
    double ss = 0.0, se = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i] || !rec.inside[i]) continue;
      ss += rec.sigma[i];
      se += rec.epsilon[i];
      ++count;
    }
    ordered_json j;
    j["pixels"] = count;
    if (count > 0) {
      j["mean"] = complex_json({ss / count, se / count});
      j["max"] = complex_json({field_max(rec.grid, rec.sigma, m).value,
                               field_max(rec.grid, rec.epsilon, m).value});
      j["min"] = complex_json({field_min(rec.grid, rec.sigma, m).value,
                               field_min(rec.grid, rec.epsilon, m).value});
    }
    regions[name] = j;
  }
  report["regions"] = regions;

  Mask bg(rec.inside);
  for (const auto& [name, m] : masks) {
    for (std::size_t i = 0; i < bg.size(); ++i) bg[i] = bg[i] && !m[i];
  }
  double bs = 0.0, be = 0.0;
  std::size_t bc = 0;
  for (std::size_t i = 0; i < bg.size(); ++i) {
    if (!bg[i]) continue;
    bs += rec.sigma[i];
    be += rec.epsilon[i];
    ++bc;
  }
  if (bc > 0) report["background_mean"] = complex_json({bs / bc, be / bc});

  report["clamped_pixels"] = rec.clamped_pixels;
  ordered_json tr;
  tr["zeroed_outside"] = r.truncation_report.zeroed_outside;
  tr["zeroed_nonfinite"] = r.truncation_report.zeroed_nonfinite;
  report["truncation"] = tr;
  ordered_json db;
  db["solved_points"] = r.dbar.solved_points;
  db["max_iterations"] = r.dbar.max_iterations;
  db["max_residual"] = r.dbar.max_residual;
  db["failures"] = r.dbar.failures.size();
  report["dbar"] = db;

  ordered_json meta;
  meta["boundary_kernel"] = "log kernel G0 in place of the Faddeev Green's function";
  meta["trace_rule"] = trace_rule_name(cfg.trace_rule);
  meta["g0_sign"] = g0_sign_name(cfg.g0_sign);
  meta["k_grid"] = {{"n", cfg.k_points}, {"K", cfg.k_cutoff}};
  meta["truncation"] = {
      {"mode", cfg.truncation.mode == Truncation::Mode::kDisk ? "disk" : "square"},
      {"radius", cfg.truncation.radius}};
  meta["odd_grid"] = {{"n", 2 * cfg.odd_m + 1}, {"h_kappa", r.scattering.h_kappa()},
                      {"fft_size", padded_fft_size(2 * cfg.odd_m + 1)}};
  meta["z_grid"] = {{"n", cfg.nz}, {"extent", cfg.z_extent},
                    {"h_z", SquareGrid{cfg.nz, cfg.z_extent}.spacing()},
                    {"fft_size", padded_fft_size(cfg.nz)}};
  meta["gmres"] = {{"restart", cfg.dbar.restart}, {"tol", cfg.dbar.tol},
                   {"max_iter", cfg.dbar.max_iter}, {"initial_guess", "zero"}};
  meta["q_branch"] = "Q21";
  meta["noise"] = {{"eta", cfg.eta}, {"seed", cfg.seed}};
  report["metadata"] = meta;

  write_text(out / "report.json", report.dump(2) + "\n");
}

namespace {

std::string finish(const RunConfig& cfg, const ReconstructionOutput& r, const StageTimings& t,
                   const fs::path& out) {
  StageTimings local = t;
  {
    Stopwatch sw(&local, "write");
    write_reconstruction(cfg, r, out);
  }
  ordered_json timings;
  double total = 0.0;
  for (const auto& [name, seconds] : local) {
    timings["stages"][name] = timings["stages"].contains(name)
                                  ? timings["stages"][name].get<double>() + seconds
                                  : seconds;
    total += seconds;
  }
  timings["total"] = total;
  timings["workers"] = cfg.workers;
  write_text(out / "timings.json", timings.dump(2) + "\n");
  std::ifstream in(out / "report.json");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::string run_pipeline(const RunConfig& cfg) {
  StageTimings timings;
  fs::create_directories(cfg.output);
  write_text(cfg.output / "config.ini", cfg.to_ini(false));
  const SimulationOutput sim = simulate(cfg, cfg.output, &timings);
  const ReconstructionOutput r = reconstruct(cfg, sim.dn_gamma, sim.dn_one, &timings);
  return finish(cfg, r, timings, cfg.output);
}

std::string run_reconstruct(const RunConfig& cfg, const fs::path& input) {
  StageTimings timings;
  const DNMatrix g = stage("load", &timings, [&] { return load_dn_csv(input / "dn_gamma.csv"); });
  const DNMatrix one = stage("load", &timings, [&] { return load_dn_csv(input / "dn_one.csv"); });
  fs::create_directories(cfg.output);
  write_text(cfg.output / "config.ini", cfg.to_ini(false));
  const ReconstructionOutput r = reconstruct(cfg, g, one, &timings);
  return finish(cfg, r, timings, cfg.output);
}

const std::vector<std::string>& artifact_files() {
  static const std::vector<std::string> files = {
      "config.ini",     "phantom.ini",  "mesh.txt",         "voltages_gamma.csv",
      "voltages_one.csv", "dn_gamma.csv", "dn_one.csv",     "scattering.csv",
      "scattering_odd.csv", "m_fields.bin", "sigma.csv",    "epsilon.csv",
      "sigma.ppm",      "epsilon.ppm",  "report.json"};
  return files;
}

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Numeric content of an artifact: doubles of a .bin file after the int32
// header, or every numeric CSV cell outside '#' lines.
std::vector<double> numeric_values(const fs::path& p) {
  std::vector<double> v;
  if (p.extension() == ".bin") {
    const std::string bytes = read_bytes(p);
    if (bytes.size() < 4 || (bytes.size() - 4) % 8 != 0) throw Error("malformed " + p.string());
    v.resize((bytes.size() - 4) / 8);
    std::memcpy(v.data(), bytes.data() + 4, v.size() * 8);
    return v;
  }
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "nan") {
        v.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      char* end = nullptr;
      const double d = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str()) v.push_back(d);
    }
  }
  return v;
}

}  // namespace

std::vector<ArtifactDiff> compare_runs(const fs::path& a, const fs::path& b) {
  static const std::vector<std::string> numeric = {
      "voltages_gamma.csv", "voltages_one.csv", "dn_gamma.csv", "dn_one.csv",
      "scattering.csv",     "scattering_odd.csv", "m_fields.bin", "sigma.csv",
      "epsilon.csv"};
  std::vector<ArtifactDiff> diffs;
  for (const auto& name : artifact_files()) {
    if (!fs::exists(a / name) || !fs::exists(b / name)) continue;
    ArtifactDiff d;
    d.file = name;
    d.identical_bytes = read_bytes(a / name) == read_bytes(b / name);
    if (std::find(numeric.begin(), numeric.end(), name) != numeric.end()) {
      const auto va = numeric_values(a / name);
      const auto vb = numeric_values(b / name);
      if (va.size() != vb.size()) throw Error("shape mismatch in " + name);
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < va.size(); ++i) {
        if (std::isnan(va[i]) && std::isnan(vb[i])) continue;
        if (std::isnan(va[i]) != std::isnan(vb[i])) throw Error("mask mismatch in " + name);
        const double e = std::abs(va[i] - vb[i]);
        d.sup_norm = std::max(d.sup_norm, e);
        num += e * e;
        den += va[i] * va[i];
        ++d.values;
      }
      d.relative_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    diffs.push_back(d);
  }
  return diffs;
}

}  // namespace dbareit
