#include "dbareit/reconstruct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace dbareit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mask of pixels whose four neighbours are also in `where`.
Mask stencil_mask(const SquareGrid& g, const Mask& where) {
  Mask out(g.size(), 0);
  for (int iy = 1; iy + 1 < g.n; ++iy) {
    for (int ix = 1; ix + 1 < g.n; ++ix) {
      out[g.index(ix, iy)] = where[g.index(ix, iy)] && where[g.index(ix - 1, iy)] &&
                             where[g.index(ix + 1, iy)] && where[g.index(ix, iy - 1)] &&
                             where[g.index(ix, iy + 1)];
    }
  }
  return out;
}

ComplexField centered(const SquareGrid& g, const ComplexField& f, const Mask& where,
                      double sign) {
  const Mask m = stencil_mask(g, where);
  const double h = g.spacing();
  ComplexField out(g.size(), 0.0);
  for (int iy = 1; iy + 1 < g.n; ++iy) {
    for (int ix = 1; ix + 1 < g.n; ++ix) {
      if (!m[g.index(ix, iy)]) continue;
      const Complex dx = (f[g.index(ix + 1, iy)] - f[g.index(ix - 1, iy)]) / (2.0 * h);
      const Complex dy = (f[g.index(ix, iy + 1)] - f[g.index(ix, iy - 1)]) / (2.0 * h);
      out[g.index(ix, iy)] = 0.5 * (dx + sign * kI * dy);
    }
  }
  return out;
}

bool in_unit_disk(const SquareGrid& g, int ix, int iy) {
  return std::abs(g.point(ix, iy)) <= 1.0;
}

}  // namespace

MPlusMinus m_plus_minus(const CgoFieldAtZero& f) {
  MPlusMinus m;
  m.grid = f.z_grid;
  m.plus.resize(f.m11.size());
  m.minus.resize(f.m11.size());
  for (std::size_t i = 0; i < f.m11.size(); ++i) {
    m.plus[i] = f.m11[i] + f.m12[i];
    m.minus[i] = f.m22[i] + f.m21[i];
  }
  m.valid = f.solved;
  return m;
}

DenominatorError::DenominatorError(std::vector<std::pair<int, int>> pixels, double floor)
    : Error([&] {
        std::ostringstream os;
        os << pixels.size() << " pixel(s) with |M| below " << floor << ":";
        for (std::size_t i = 0; i < pixels.size() && i < 20; ++i) {
          os << " (" << pixels[i].first << "," << pixels[i].second << ")";
        }
        if (pixels.size() > 20) os << " ...";
        return os.str();
      }()),
      pixels_(std::move(pixels)) {}

ComplexField dz_centered(const SquareGrid& g, const ComplexField& f, const Mask& where) {
  return centered(g, f, where, -1.0);
}

ComplexField dzbar_centered(const SquareGrid& g, const ComplexField& f, const Mask& where) {
  return centered(g, f, where, 1.0);
}

PotentialField compute_q(const MPlusMinus& m, double floor) {
  const SquareGrid& g = m.grid;
  PotentialField q;
  q.grid = g;
  q.defined = stencil_mask(g, m.valid);
  const ComplexField dbar_plus = dzbar_centered(g, m.plus, m.valid);
  const ComplexField d_minus = dz_centered(g, m.minus, m.valid);
  q.q12.assign(g.size(), 0.0);
  q.q21.assign(g.size(), 0.0);
  std::vector<std::pair<int, int>> bad;
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      const std::size_t i = g.index(ix, iy);
      if (!q.defined[i]) continue;
      if (std::abs(m.plus[i]) < floor || std::abs(m.minus[i]) < floor) {
        bad.emplace_back(ix, iy);
        continue;
      }
      q.q12[i] = dbar_plus[i] / m.minus[i];
      q.q21[i] = d_minus[i] / m.plus[i];
    }
  }
  if (!bad.empty()) throw DenominatorError(std::move(bad), floor);
  return q;
}

ComplexField cauchy_transform_loggamma(const PotentialField& q, QBranch branch) {
  // 1/(z - w) = pi * 1/(pi (z - w)), so the prefactor -(2/pi) becomes -2.
  auto kernel =
      std::make_shared<const CauchyKernelGrid>(q.grid, branch == QBranch::kQ12);
  CauchyConvolver conv(kernel);
  ComplexField out(q.grid.size());
  conv.apply(branch == QBranch::kQ21 ? q.q21.data() : q.q12.data(), out.data());
  for (Complex& v : out) v *= -2.0;
  return out;
}

ReconResult finalize(const SquareGrid& grid, const ComplexField& loggamma, Complex gamma0) {
  if (loggamma.size() != grid.size()) throw Error("log-gamma field does not match the grid");
  ReconResult r;
  r.grid = grid;
  r.background = gamma0;
  r.gamma.assign(grid.size(), Complex(kNaN, kNaN));
  r.sigma.assign(grid.size(), kNaN);
  r.epsilon.assign(grid.size(), kNaN);
  r.inside.assign(grid.size(), 0);
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix) {
      if (!in_unit_disk(grid, ix, iy)) continue;
      const std::size_t i = grid.index(ix, iy);
      Complex g = gamma0 * std::exp(loggamma[i]);
      if (g.imag() < 0.0) {
        g.imag(0.0);
        ++r.clamped_pixels;
      }
      r.gamma[i] = g;
      r.sigma[i] = g.real();
      r.epsilon[i] = g.imag();
      r.inside[i] = 1;
    }
  }
  return r;
}

double dynamic_range(const RealField& recon, const Mask& mask, double truth_max,
                     double truth_min) {
  if (!(truth_max > truth_min)) throw Error("dynamic range undefined: degenerate truth range");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!mask[i] || !std::isfinite(recon[i])) continue;
    lo = std::min(lo, recon[i]);
    hi = std::max(hi, recon[i]);
  }
  if (!(hi >= lo)) throw Error("dynamic range undefined: empty mask");
  return 100.0 * (hi - lo) / (truth_max - truth_min);
}

namespace {

Extremum find_extremum(const SquareGrid& g, const RealField& f, const Mask& mask, bool want_max) {
  Extremum e;
  bool found = false;
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      const std::size_t i = g.index(ix, iy);
      if (!mask[i] || !std::isfinite(f[i])) continue;
      if (!found || (want_max ? f[i] > e.value : f[i] < e.value)) {
        e = {f[i], ix, iy, g.point(ix, iy)};
        found = true;
      }
    }
  }
  if (!found) throw Error("extremum over an empty mask");
  return e;
}

}  // namespace

Extremum field_max(const SquareGrid& g, const RealField& f, const Mask& mask) {
  return find_extremum(g, f, mask, true);
}

Extremum field_min(const SquareGrid& g, const RealField& f, const Mask& mask) {
  return find_extremum(g, f, mask, false);
}

Mask region_mask(const AdmittivityField& phantom, const std::string& name, const SquareGrid& g,
                 int dilation) {
  std::optional<std::size_t> which;
  for (std::size_t r = 0; r < phantom.regions().size(); ++r) {
    if (phantom.regions()[r].name == name) which = r;
  }
  if (!which) throw Error("phantom has no region named '" + name + "'");
  Mask base(g.size(), 0);
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      if (!in_unit_disk(g, ix, iy)) continue;
      base[g.index(ix, iy)] = phantom.region_at_unit(g.point(ix, iy)) == which;
    }
  }
  Mask out(g.size(), 0);
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      if (!base[g.index(ix, iy)]) continue;
      for (int dy = -dilation; dy <= dilation; ++dy) {
        for (int dx = -dilation; dx <= dilation; ++dx) {
          const int jx = ix + dx;
          const int jy = iy + dy;
          if (dx * dx + dy * dy > dilation * dilation) continue;
          if (jx < 0 || jy < 0 || jx >= g.n || jy >= g.n) continue;
          if (in_unit_disk(g, jx, jy)) out[g.index(jx, jy)] = 1;
        }
      }
    }
  }
  return out;
}

ComplexField sample_truth(const AdmittivityField& phantom, const SquareGrid& g) {
  ComplexField out(g.size(), Complex(kNaN, kNaN));
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      if (in_unit_disk(g, ix, iy)) out[g.index(ix, iy)] = phantom.sample_unit(g.point(ix, iy));
    }
  }
  return out;
}

void save_grid_csv(const SquareGrid& g, const RealField& f, const std::filesystem::path& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw Error("cannot write " + path.string());
  std::fprintf(out, "# n=%d extent=%.17g\n", g.n, g.extent);
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      const double v = f[g.index(ix, iy)];
      if (std::isfinite(v)) {
        std::fprintf(out, "%s%.17g", ix == 0 ? "" : ",", v);
      } else {
        std::fprintf(out, "%snan", ix == 0 ? "" : ",");
      }
    }
    std::fprintf(out, "\n");
  }
  std::fclose(out);
}

RealField load_grid_csv(const std::filesystem::path& path, int* n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  int size = 0;
  double extent = 0.0;
  if (std::sscanf(line.c_str(), "# n=%d extent=%lf", &size, &extent) != 2 || size < 1) {
    throw Error("grid CSV: malformed header");
  }
  RealField f;
  f.reserve(static_cast<std::size_t>(size) * size);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell == "nan" ? kNaN : std::stod(cell));
  }
  if (f.size() != static_cast<std::size_t>(size) * size) throw Error("grid CSV: wrong size");
  if (n) *n = size;
  return f;
}

void save_ppm(const SquareGrid& g, const RealField& f, const std::filesystem::path& path,
              double lo, double hi) {
  // Five-stop perceptual ramp (dark blue to yellow).
  static constexpr std::array<std::array<double, 3>, 5> kStops = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << g.n << " " << g.n << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (int row = 0; row < g.n; ++row) {
    const int iy = g.n - 1 - row;
    for (int ix = 0; ix < g.n; ++ix) {
      const double v = f[g.index(ix, iy)];
      unsigned char rgb[3] = {0, 0, 0};
      if (std::isfinite(v)) {
        const double t = std::clamp((v - lo) / span, 0.0, 1.0) * (kStops.size() - 1);
        const auto s = std::min(static_cast<std::size_t>(t), kStops.size() - 2);
        const double u = t - static_cast<double>(s);
        for (int c = 0; c < 3; ++c) {
          rgb[c] = static_cast<unsigned char>(
              std::lround((1.0 - u) * kStops[s][c] + u * kStops[s + 1][c]));
        }
      }
      out.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
}

}  // namespace dbareit
