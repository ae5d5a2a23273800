#include "dbareit/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace dbareit {
namespace {

constexpr double kContainTol = 1e-12;

void validate_value(const Complex& v, const std::string& what) {
  if (!(v.real() > 0.0)) {
    throw Error(what + ": real part of the admittivity must be positive");
  }
  if (v.imag() < 0.0) {
    throw Error(what + ": negative permittivity is not physical");
  }
}

bool shape_inside_unit_disk(const Shape& shape) {
  if (const auto* d = std::get_if<DiskShape>(&shape)) {
    return d->radius > 0.0 && std::abs(d->center) + d->radius <= 1.0 + kContainTol;
  }
  const auto& e = std::get<Ellipse>(shape);
  if (!(e.semi_x > 0.0 && e.semi_y > 0.0)) return false;
  const Complex rot = std::polar(1.0, e.rotation);
  for (int i = 0; i < 720; ++i) {
    const double t = 2.0 * kPi * i / 720.0;
    const Complex p = e.center + rot * Complex(e.semi_x * std::cos(t),
                                               e.semi_y * std::sin(t));
    if (std::abs(p) > 1.0 + kContainTol) return false;
  }
  return true;
}

std::string format_complex(Complex v) {
  std::ostringstream os;
  os << std::setprecision(17) << v.real() << ' ' << v.imag();
  return os.str();
}

Complex parse_complex(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  double re = 0.0;
  double im = 0.0;
  if (!(is >> re)) throw Error("phantom file: cannot parse '" + key + "'");
  if (!(is >> im)) im = 0.0;
  return {re, im};
}

std::vector<double> parse_numbers(const std::string& text, std::size_t count,
                                  const std::string& key) {
  std::istringstream is(text);
  std::vector<double> out;
  double v = 0.0;
  while (is >> v) out.push_back(v);
  if (out.size() != count) {
    throw Error("phantom file: '" + key + "' expects " + std::to_string(count) +
                " numbers");
  }
  return out;
}

// Shared chest layout on the unit disk. Coordinates approximate the
// pictured cross-section: lungs left and right of center, heart anterior
// and between them.
Ellipse left_lung() { return {{-0.45, 0.10}, 0.22, 0.42, 0.0}; }
Ellipse right_lung() { return {{0.45, 0.10}, 0.22, 0.42, 0.0}; }
Ellipse heart() { return {{0.0, -0.35}, 0.22, 0.18, 0.0}; }

}  // namespace

bool shape_contains(const Shape& shape, Complex z) {
  if (const auto* d = std::get_if<DiskShape>(&shape)) {
    return std::abs(z - d->center) <= d->radius * (1.0 + kContainTol);
  }
  const auto& e = std::get<Ellipse>(shape);
  const Complex local = (z - e.center) * std::polar(1.0, -e.rotation);
  const double u = local.real() / e.semi_x;
  const double v = local.imag() / e.semi_y;
  return u * u + v * v <= 1.0 + kContainTol;
}

AdmittivityField::AdmittivityField(Complex background, std::vector<Region> regions,
                                   double domain_radius)
    : background_(background),
      regions_(std::move(regions)),
      domain_radius_(domain_radius) {
  if (!(domain_radius_ > 0.0)) throw Error("domain radius must be positive");
  validate_value(background_, "background");
  for (const auto& r : regions_) {
    validate_value(r.value, "region '" + r.name + "'");
    if (!shape_inside_unit_disk(r.shape)) {
      throw Error("region '" + r.name + "' does not lie inside the disk");
    }
  }
}

std::optional<std::size_t> AdmittivityField::region_at_unit(Complex z) const {
  for (std::size_t i = regions_.size(); i-- > 0;) {
    if (shape_contains(regions_[i].shape, z)) return i;
  }
  return std::nullopt;
}

Complex AdmittivityField::sample_unit(Complex z) const {
  if (std::abs(z) > 1.0 + 1e-9) {
    throw Error("sample point lies outside the domain");
  }
  const auto idx = region_at_unit(z);
  return idx ? regions_[*idx].value : background_;
}

Complex AdmittivityField::sample(Complex z) const {
  return sample_unit(z / domain_radius_);
}

double AdmittivityField::min_real() const {
  double v = background_.real();
  for (const auto& r : regions_) v = std::min(v, r.value.real());
  return v;
}
double AdmittivityField::max_real() const {
  double v = background_.real();
  for (const auto& r : regions_) v = std::max(v, r.value.real());
  return v;
}
double AdmittivityField::min_imag() const {
  double v = background_.imag();
  for (const auto& r : regions_) v = std::min(v, r.value.imag());
  return v;
}
double AdmittivityField::max_imag() const {
  double v = background_.imag();
  for (const auto& r : regions_) v = std::max(v, r.value.imag());
  return v;
}

AdmittivityField AdmittivityField::scaled(Complex scale) const {
  std::vector<Region> regions = regions_;
  for (auto& r : regions) r.value /= scale;
  // Scaled values may legitimately carry a small negative imaginary part
  // (e.g. lungs relative to a lossy background), so skip re-validation.
  AdmittivityField out(Complex(1.0, 0.0), {}, domain_radius_);
  out.background_ = background_ / scale;
  out.regions_ = std::move(regions);
  return out;
}

AdmittivityField constant_field(Complex value, double domain_radius) {
  return AdmittivityField(value, {}, domain_radius);
}

ChestValues chest_values(ChestPreset preset) {
  switch (preset) {
    case ChestPreset::kExample1:
      return {{1.0, 0.0}, {1.2, 0.3}, {0.8, 0.1}};
    case ChestPreset::kExample2:
      return {{1.0, 0.0}, {1.2, 0.3}, {0.8, 0.0}};
    case ChestPreset::kExample3:
      return {{0.8, 0.3}, {1.2, 0.6}, {0.5, 0.1}};
  }
  throw Error("unknown chest preset");
}

AdmittivityField chest_phantom(const ChestValues& values, double domain_radius) {
  std::vector<Region> regions = {
      {"left_lung", left_lung(), values.lungs},
      {"right_lung", right_lung(), values.lungs},
      {"heart", heart(), values.heart},
  };
  return AdmittivityField(values.background, std::move(regions), domain_radius);
}

AdmittivityField chest_phantom(ChestPreset preset, double domain_radius) {
  return chest_phantom(chest_values(preset), domain_radius);
}

std::optional<ChestPreset> parse_chest_preset(const std::string& name) {
  if (name == "example1") return ChestPreset::kExample1;
  if (name == "example2") return ChestPreset::kExample2;
  if (name == "example3") return ChestPreset::kExample3;
  return std::nullopt;
}

AdmittivityField load_phantom(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("cannot read phantom file: " + std::string(e.what()));
  }
  const auto& head = tree.get_child_optional("phantom");
  if (!head) throw Error("phantom file: missing [phantom] section");
  const double radius = head->get<double>("domain_radius", 0.15);
  const Complex background =
      parse_complex(head->get<std::string>("background", "1 0"), "background");

  std::vector<Region> regions;
  for (const auto& [section, body] : tree) {
    constexpr std::string_view kPrefix = "region:";
    if (section.rfind(kPrefix, 0) != 0) continue;
    Region region;
    region.name = section.substr(kPrefix.size());
    const auto kind = body.get<std::string>("shape", "ellipse");
    const auto center = parse_numbers(body.get<std::string>("center", ""), 2,
                                      section + ".center");
    if (kind == "ellipse") {
      const auto axes = parse_numbers(body.get<std::string>("semi_axes", ""), 2,
                                      section + ".semi_axes");
      region.shape = Ellipse{{center[0], center[1]}, axes[0], axes[1],
                             body.get<double>("rotation", 0.0)};
    } else if (kind == "disk") {
      region.shape = DiskShape{{center[0], center[1]}, body.get<double>("radius")};
    } else {
      throw Error("phantom file: unknown shape '" + kind + "'");
    }
    region.value = parse_complex(body.get<std::string>("value", ""),
                                 section + ".value");
    regions.push_back(std::move(region));
  }
  return AdmittivityField(background, std::move(regions), radius);
}

void save_phantom(const AdmittivityField& field,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write phantom file " + path.string());
  out << std::setprecision(17);
  out << "[phantom]\n";
  out << "domain_radius = " << field.domain_radius() << "\n";
  out << "background = " << format_complex(field.background()) << "\n";
  for (const auto& r : field.regions()) {
    out << "\n[region:" << r.name << "]\n";
    if (const auto* e = std::get_if<Ellipse>(&r.shape)) {
      out << "shape = ellipse\n";
      out << "center = " << e->center.real() << ' ' << e->center.imag() << "\n";
      out << "semi_axes = " << e->semi_x << ' ' << e->semi_y << "\n";
      out << "rotation = " << e->rotation << "\n";
    } else {
      const auto& d = std::get<DiskShape>(r.shape);
      out << "shape = disk\n";
      out << "center = " << d.center.real() << ' ' << d.center.imag() << "\n";
      out << "radius = " << d.radius << "\n";
    }
    out << "value = " << format_complex(r.value) << "\n";
  }
}

AdmittivityField RadialPhantom::to_field(double domain_radius) const {
  if (!(inclusion_radius > 0.0 && inclusion_radius < 1.0)) {
    throw Error("inclusion radius must lie in (0, 1)");
  }
  return AdmittivityField(
      gamma_outer, {{"inclusion", DiskShape{{0.0, 0.0}, inclusion_radius}, gamma_inner}},
      domain_radius);
}

Complex radial_dn_eigenvalue(const RadialPhantom& p, int n) {
  if (n == 0) {
    throw Error("DN eigenvalue for n = 0: constants are in the kernel");
  }
  if (!(p.gamma_inner.real() > 0.0 && p.gamma_outer.real() > 0.0)) {
    throw Error("radial phantom values must have positive real part");
  }
  const int an = std::abs(n);
  const Complex mu = (p.gamma_inner - p.gamma_outer) / (p.gamma_inner + p.gamma_outer);
  const Complex t = mu * std::pow(p.inclusion_radius, 2.0 * an);
  return static_cast<double>(an) * p.gamma_outer * (1.0 + t) / (1.0 - t);
}

}  // namespace dbareit
