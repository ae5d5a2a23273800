#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbareit/common.hpp"
#include "dbareit/scattering.hpp"

namespace dbareit {

struct DbarSettings {
  double tol = 1e-6;
  int restart = 30;
  int max_iter = 200;
};

struct GmresResult {
  int iterations = 0;      // operator applications inside Arnoldi
  double residual = 0.0;   // true relative residual ||b - Ax|| / ||b||
  bool converged = false;
};

using LinearOperator = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations. `x` holds
/// the initial guess on entry and the iterate on return.
GmresResult gmres(const LinearOperator& op, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
                  int restart, double tol, int max_iter);

class DbarConvergenceError : public Error {
 public:
  DbarConvergenceError(Complex z, double residual, int iterations);
  Complex z() const { return z_; }
  double residual() const { return residual_; }

 private:
  Complex z_;
  double residual_;
};

/// Smallest 7-smooth multiple of 8 that holds an aperiodic convolution of two
/// n-point sequences (>= 2n - 1).
int padded_fft_size(int n);

/// Spectrum of h^2 / (pi k) (or h^2 / (pi conj k)) sampled on the zero-padded
/// difference grid, with the value at k = 0 set to 0. Read-only once built.
class CauchyKernelGrid {
 public:
  explicit CauchyKernelGrid(const SquareGrid& grid, bool conjugate = false);

  const SquareGrid& grid() const { return grid_; }
  int padded() const { return padded_; }
  /// 1/(pi k) at grid offset (dx, dy); 0 at the origin.
  Complex sample(int dx, int dy) const;
  /// FFT of the padded kernel including the h^2 / P^2 normalization.
  const std::vector<Complex>& spectrum() const { return spectrum_; }

 private:
  SquareGrid grid_;
  bool conjugate_ = false;
  int padded_ = 0;
  std::vector<Complex> spectrum_;
};

/// (1/pi k) * f on a square grid via FFT. Owns its FFTW plans and buffers, so
/// each worker thread needs its own instance.
class CauchyConvolver {
 public:
  explicit CauchyConvolver(std::shared_ptr<const CauchyKernelGrid> kernel);
  ~CauchyConvolver();
  CauchyConvolver(const CauchyConvolver&) = delete;
  CauchyConvolver& operator=(const CauchyConvolver&) = delete;

  /// out may alias nothing in `in`; both have grid().size() entries.
  void apply(const Complex* in, Complex* out);
  const CauchyKernelGrid& kernel() const { return *kernel_; }

 private:
  struct Plans;
  std::shared_ptr<const CauchyKernelGrid> kernel_;
  std::unique_ptr<Plans> plans_;
};

struct DbarPointResult {
  Complex m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};  // at k = 0
  int iterations_a = 0;
  int iterations_b = 0;
  double residual_a = 0.0;
  double residual_b = 0.0;
  bool converged = true;
  // Full k-grid fields, filled only on request.
  ComplexField f11, f12, f21, f22;
};

/// Solves, for one z, the two coupled systems on the odd k-grid
///   M11 - C[M12(conj k) e(z,-k) S21] = 1,  M12 - C[M11(conj k) e(z,conj k) S12] = 0,
///   M22 - C[M21(conj k) e(z,conj k) S12] = 1,  M21 - C[M22(conj k) e(z,-k) S21] = 0,
/// with C the convolution with 1/(pi k). conj k is the vertical index flip.
class DbarSolver {
 public:
  DbarSolver(const ScatteringGrid& odd, std::shared_ptr<const CauchyKernelGrid> kernel,
             DbarSettings settings = {});

  DbarPointResult solve(Complex z, bool keep_fields = false);

  /// Relative residual of system A (which = 0) or B (which = 1) for the given
  /// full-grid fields (first, second unknown).
  double residual(Complex z, int which, const ComplexField& first,
                  const ComplexField& second);

  const SquareGrid& grid() const { return odd_->grid; }

 private:
  void set_weights(Complex z);
  void apply_system(const ComplexField& wa, const ComplexField& wb,
                    const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

  const ScatteringGrid* odd_;
  DbarSettings settings_;
  CauchyConvolver conv_;
  ComplexField w12_, w21_;
  ComplexField tmp_in_, tmp_out_;
};

/// Index of conj(k) for the grid index of k.
inline std::size_t flip_index(const SquareGrid& g, std::size_t idx) {
  const int ix = static_cast<int>(idx % g.n);
  const int iy = static_cast<int>(idx / g.n);
  return g.index(ix, g.n - 1 - iy);
}

/// Convenience wrapper; throws DbarConvergenceError when either system fails.
DbarPointResult solve_dbar_at_z(const ScatteringData& s, Complex z,
                                const DbarSettings& settings = {}, bool keep_fields = false);

/// M(z, 0) over an n_z x n_z grid on [-extent, extent]^2. Points outside the
/// solve radius keep the identity.
struct CgoFieldAtZero {
  SquareGrid z_grid;
  ComplexField m11, m12, m21, m22;
  std::vector<std::uint8_t> solved;

  static CgoFieldAtZero identity(const SquareGrid& g);
};

struct DbarFailure {
  int ix = 0;
  int iy = 0;
  Complex z;
  double residual = 0.0;
};

struct DbarRunResult {
  CgoFieldAtZero field;
  std::vector<DbarFailure> failures;  // sorted by grid index; values kept
  int max_iterations = 0;
  double max_residual = 0.0;
  std::size_t solved_points = 0;
};

DbarRunResult solve_all_z(const ScatteringData& s, const SquareGrid& z_grid,
                          const DbarSettings& settings = {}, int workers = 1,
                          double solve_radius = 1.1);

/// Binary layout: int32 n_z, then for m11, m12, m21, m22 in turn n_z^2
/// (re, im) float64 pairs row-major (imaginary axis as the row), native
/// little-endian.
void save_m_fields(const CgoFieldAtZero& f, const std::filesystem::path& path);
CgoFieldAtZero load_m_fields(const std::filesystem::path& path, double extent = 1.1);

}  // namespace dbareit
