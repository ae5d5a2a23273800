#pragma once

#include <filesystem>
#include <optional>

#include "dbareit/cgo_boundary.hpp"
#include "dbareit/common.hpp"

namespace dbareit {

struct Truncation {
  enum class Mode { kSquare, kDisk };
  Mode mode = Mode::kSquare;
  double radius = 0.0;  // half-width for kSquare, radius for kDisk

  static Truncation square(double half_width) { return {Mode::kSquare, half_width}; }
  static Truncation disk(double radius) { return {Mode::kDisk, radius}; }
  bool keeps(Complex k) const;
};

/// Off-diagonal scattering data on a square k-grid.
struct ScatteringGrid {
  SquareGrid grid;
  ComplexField s12;
  ComplexField s21;
};

struct ScatteringData {
  ScatteringGrid source;                 // grid the boundary traces were solved on
  std::optional<Truncation> truncation;  // last truncation applied
  std::optional<ScatteringGrid> odd;     // (2m+1)^2 grid containing k = 0
  double h_kappa() const { return odd ? odd->grid.spacing() : 0.0; }
};

/// S_12(k) = (i/L) sum_l e^{-i conj(k) z_l} Psi_12(z_l, k) z_l,
/// S_21(k) = -(i/L) sum_l e^{i conj(k) conj(z_l)} Psi_21(z_l, k) conj(z_l);
/// zero at invalid grid points.
ScatteringData compute_s(const CGOTraceSet& traces);

/// Single-frequency version of the finite sums above.
std::pair<Complex, Complex> scattering_at(const Eigen::VectorXcd& psi12,
                                          const Eigen::VectorXcd& psi21, Complex k,
                                          const std::vector<double>& electrode_angles);

struct TruncationReport {
  std::size_t zeroed_outside = 0;
  std::size_t zeroed_nonfinite = 0;
};

/// Zeroes values outside the region and every non-finite value, on the source
/// grid and on the odd grid when present.
ScatteringData truncate(const ScatteringData& s, const Truncation& t,
                        TruncationReport* report = nullptr);

/// Bilinear interpolation (real and imaginary parts separately) onto the
/// (2m+1) x (2m+1) grid over the same square; the origin is interpolated.
ScatteringData to_odd_grid(const ScatteringData& s, int m = 64);

/// Resamples a field on `from` onto `to` with bilinear interpolation.
ComplexField bilinear_resample(const SquareGrid& from, const ComplexField& values,
                               const SquareGrid& to);

/// CSV rows: k_re, k_im, Re S12, Im S12, Re S21, Im S21.
void save_scattering_csv(const ScatteringGrid& s, const std::filesystem::path& path);
ScatteringGrid load_scattering_csv(const std::filesystem::path& path);

}  // namespace dbareit
