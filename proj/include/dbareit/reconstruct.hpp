#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dbareit/common.hpp"
#include "dbareit/dbar_solver.hpp"
#include "dbareit/phantom.hpp"

namespace dbareit {

using Mask = std::vector<std::uint8_t>;

struct MPlusMinus {
  SquareGrid grid;
  ComplexField plus;   // M11 + M12 at k = 0
  ComplexField minus;  // M22 + M21 at k = 0
  Mask valid;
};

MPlusMinus m_plus_minus(const CgoFieldAtZero& f);

struct PotentialField {
  SquareGrid grid;
  ComplexField q12;
  ComplexField q21;
  Mask defined;  // pixel and its four neighbours are valid
};

class DenominatorError : public Error {
 public:
  DenominatorError(std::vector<std::pair<int, int>> pixels, double floor);
  const std::vector<std::pair<int, int>>& pixels() const { return pixels_; }

 private:
  std::vector<std::pair<int, int>> pixels_;
};

/// Centered-difference derivatives with d = (d/dx - i d/dy)/2 and
/// dbar = (d/dx + i d/dy)/2; the row index is the imaginary axis.
ComplexField dz_centered(const SquareGrid& g, const ComplexField& f, const Mask& where);
ComplexField dzbar_centered(const SquareGrid& g, const ComplexField& f, const Mask& where);

/// Q12 = dbar M+ / M-, Q21 = d M- / M+. Zero where undefined. Throws
/// DenominatorError when a denominator falls below `floor` on a defined pixel.
PotentialField compute_q(const MPlusMinus& m, double floor = 1e-8);

enum class QBranch { kQ12, kQ21 };

/// log gamma = -(2/pi) int Q21(w) / (z - w) dmu(w), or with Q12 and the
/// kernel 1 / conj(z - w), evaluated as a zero-padded FFT convolution.
ComplexField cauchy_transform_loggamma(const PotentialField& q, QBranch branch = QBranch::kQ21);

struct ReconResult {
  SquareGrid grid;
  ComplexField gamma;  // NaN outside the unit disk
  RealField sigma;
  RealField epsilon;
  Mask inside;
  std::size_t clamped_pixels = 0;
  Complex background{1.0, 0.0};
};

/// gamma = gamma0 exp(log gamma); masks |z| > 1; negative imaginary parts
/// raised to 0 and counted.
ReconResult finalize(const SquareGrid& grid, const ComplexField& loggamma, Complex gamma0);

/// 100 (max - min of recon over mask) / (truth_max - truth_min).
double dynamic_range(const RealField& recon, const Mask& mask, double truth_max,
                     double truth_min);

struct Extremum {
  double value = 0.0;
  int ix = 0;
  int iy = 0;
  Complex z;
};

Extremum field_max(const SquareGrid& g, const RealField& f, const Mask& mask);
Extremum field_min(const SquareGrid& g, const RealField& f, const Mask& mask);

/// Pixels of the named phantom region (unit-disk coordinates), dilated by
/// `dilation` pixels.
Mask region_mask(const AdmittivityField& phantom, const std::string& name, const SquareGrid& g,
                 int dilation = 2);

/// True field sampled on the grid, NaN outside the unit disk.
ComplexField sample_truth(const AdmittivityField& phantom, const SquareGrid& g);

/// CSV of the grid values row by row (imaginary axis as row, top row last);
/// NaN is written as "nan".
void save_grid_csv(const SquareGrid& g, const RealField& f, const std::filesystem::path& path);
RealField load_grid_csv(const std::filesystem::path& path, int* n = nullptr);

/// Binary PPM heatmap; NaN pixels are black. Rows are flipped so that +Im is up.
void save_ppm(const SquareGrid& g, const RealField& f, const std::filesystem::path& path,
              double lo, double hi);

}  // namespace dbareit
