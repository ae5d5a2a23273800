#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dbareit/common.hpp"

namespace dbareit {

/// Ellipse in unit-disk coordinates. `rotation` turns the first semi-axis
/// counter-clockwise from the x axis.
struct Ellipse {
  Complex center;
  double semi_x = 0.0;
  double semi_y = 0.0;
  double rotation = 0.0;
};

struct DiskShape {
  Complex center;
  double radius = 0.0;
};

using Shape = std::variant<Ellipse, DiskShape>;

bool shape_contains(const Shape& shape, Complex z);

struct Region {
  std::string name;
  Shape shape;
  Complex value;
};

/// Piecewise-constant complex admittivity on a disk.
///
/// Region geometry is stored in unit-disk coordinates; `sample` takes
/// physical coordinates and normalizes by `domain_radius`. When regions
/// overlap the last listed region wins.
class AdmittivityField {
 public:
  AdmittivityField(Complex background, std::vector<Region> regions,
                   double domain_radius = 0.15);

  /// Value at a physical point, |z| <= domain_radius.
  Complex sample(Complex z) const;
  /// Value at a point of the unit-disk copy, |z| <= 1.
  Complex sample_unit(Complex z) const;

  /// Index of the region that owns a unit-disk point, or nullopt for background.
  std::optional<std::size_t> region_at_unit(Complex z) const;

  Complex background() const { return background_; }
  const std::vector<Region>& regions() const { return regions_; }
  double domain_radius() const { return domain_radius_; }

  /// Smallest and largest real / imaginary parts over background and regions.
  double min_real() const;
  double max_real() const;
  double min_imag() const;
  double max_imag() const;

  /// Same geometry with every value divided by `scale`.
  AdmittivityField scaled(Complex scale) const;

 private:
  Complex background_;
  std::vector<Region> regions_;
  double domain_radius_;
};

AdmittivityField constant_field(Complex value, double domain_radius = 0.15);

enum class ChestPreset { kExample1, kExample2, kExample3 };

/// Organ values for the chest layout.
struct ChestValues {
  Complex background;
  Complex heart;
  Complex lungs;
};

ChestValues chest_values(ChestPreset preset);

/// Two lungs and a heart on the shared unit-disk layout.
AdmittivityField chest_phantom(ChestPreset preset, double domain_radius = 0.15);
AdmittivityField chest_phantom(const ChestValues& values,
                               double domain_radius = 0.15);

std::optional<ChestPreset> parse_chest_preset(const std::string& name);

/// Reads a phantom description (INI-style key/value text, see
/// presets/README.md for the format).
AdmittivityField load_phantom(const std::filesystem::path& path);
void save_phantom(const AdmittivityField& field,
                  const std::filesystem::path& path);

/// Concentric inclusion used to check the forward solver.
struct RadialPhantom {
  double inclusion_radius = 0.5;  // fraction of the unit disk
  Complex gamma_inner{1.0, 0.0};
  Complex gamma_outer{1.0, 0.0};

  AdmittivityField to_field(double domain_radius = 0.15) const;
};

/// Continuum DN eigenvalue for e^{i n theta} on the unit disk:
/// |n| g_out (1 + mu rho^{2|n|}) / (1 - mu rho^{2|n|}),
/// mu = (g_in - g_out) / (g_in + g_out).
Complex radial_dn_eigenvalue(const RadialPhantom& phantom, int n);

}  // namespace dbareit
