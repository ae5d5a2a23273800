#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbareit {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform n x n grid over [-extent, extent]^2, endpoints included.
///
/// Fields on the grid are stored row-major with the imaginary axis as the
/// row index, so `index(ix, iy) = iy * n + ix` and the point is
/// `coord(ix) + i coord(iy)`. Coordinates are computed so that the grid is
/// exactly symmetric: `coord(n - 1 - i) == -coord(i)` in floating point, and
/// the center of an odd grid is exactly zero.
struct SquareGrid {
  int n = 0;
  double extent = 0.0;

  double spacing() const { return n > 1 ? 2.0 * extent / (n - 1) : 0.0; }
  double coord(int i) const {
    return n > 1 ? (2.0 * i - (n - 1)) * extent / (n - 1) : 0.0;
  }
  Complex point(int ix, int iy) const { return {coord(ix), coord(iy)}; }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * n + ix;
  }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  bool operator==(const SquareGrid&) const = default;
};

/// Complex samples over a SquareGrid in the layout described there.
using ComplexField = std::vector<Complex>;
using RealField = std::vector<double>;

/// e(z, k) = exp(i (z k + conj(z) conj(k))), a unimodular plane wave.
inline Complex plane_wave(Complex z, Complex k) {
  return std::polar(1.0, 2.0 * (z * k).real());
}

}  // namespace dbareit
