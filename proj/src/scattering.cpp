#include "dbareit/scattering.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace dbareit {

bool Truncation::keeps(Complex k) const {
  if (mode == Mode::kDisk) return std::abs(k) <= radius;
  return std::abs(k.real()) <= radius && std::abs(k.imag()) <= radius;
}

std::pair<Complex, Complex> scattering_at(const Eigen::VectorXcd& psi12,
                                          const Eigen::VectorXcd& psi21, Complex k,
                                          const std::vector<double>& electrode_angles) {
  const auto L = static_cast<double>(electrode_angles.size());
  Complex s12 = 0.0;
  Complex s21 = 0.0;
  const Complex kbar = std::conj(k);
  for (std::size_t l = 0; l < electrode_angles.size(); ++l) {
    const Complex z = std::polar(1.0, electrode_angles[l]);
    const auto row = static_cast<Eigen::Index>(l);
    s12 += std::exp(-kI * kbar * z) * psi12[row] * z;
    s21 += std::exp(kI * kbar * std::conj(z)) * psi21[row] * std::conj(z);
  }
  return {kI / L * s12, -kI / L * s21};
}

ScatteringData compute_s(const CGOTraceSet& traces) {
  ScatteringData out;
  out.source.grid = traces.grid.grid;
  const std::size_t n = traces.grid.size();
  out.source.s12.assign(n, 0.0);
  out.source.s21.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!traces.valid[j]) continue;
    const auto col = static_cast<Eigen::Index>(j);
    const auto [s12, s21] = scattering_at(traces.psi12.col(col), traces.psi21.col(col),
                                          traces.grid.point(j), traces.electrode_angles);
    out.source.s12[j] = s12;
    out.source.s21[j] = s21;
  }
  return out;
}

namespace {

void truncate_grid(ScatteringGrid& g, const Truncation& t, TruncationReport& report) {
  for (int iy = 0; iy < g.grid.n; ++iy) {
    for (int ix = 0; ix < g.grid.n; ++ix) {
      const std::size_t idx = g.grid.index(ix, iy);
      const bool finite = std::isfinite(g.s12[idx].real()) &&
                          std::isfinite(g.s12[idx].imag()) &&
                          std::isfinite(g.s21[idx].real()) &&
                          std::isfinite(g.s21[idx].imag());
      if (!finite) {
        ++report.zeroed_nonfinite;
      } else if (!t.keeps(g.grid.point(ix, iy))) {
        if (g.s12[idx] != Complex(0.0) || g.s21[idx] != Complex(0.0)) {
          ++report.zeroed_outside;
        }
      } else {
        continue;
      }
      g.s12[idx] = 0.0;
      g.s21[idx] = 0.0;
    }
  }
}

}  // namespace

ScatteringData truncate(const ScatteringData& s, const Truncation& t,
                        TruncationReport* report) {
  if (!(t.radius > 0.0)) throw Error("truncation radius must be positive");
  ScatteringData out = s;
  TruncationReport local;
  truncate_grid(out.source, t, local);
  if (out.odd) truncate_grid(*out.odd, t, local);
  out.truncation = t;
  if (report) *report = local;
  return out;
}

ComplexField bilinear_resample(const SquareGrid& from, const ComplexField& values,
                               const SquareGrid& to) {
  if (to.extent > from.extent * (1.0 + 1e-12)) {
    throw Error("target grid extends beyond the source grid");
  }
  const double h = from.spacing();
  ComplexField out(to.size());
  auto cell = [&](double x, int& i, double& t) {
    const double f = (x + from.extent) / h;
    i = std::clamp(static_cast<int>(std::floor(f)), 0, from.n - 2);
    t = std::clamp(f - i, 0.0, 1.0);
  };
  for (int iy = 0; iy < to.n; ++iy) {
    int jy = 0;
    double ty = 0.0;
    cell(to.coord(iy), jy, ty);
    for (int ix = 0; ix < to.n; ++ix) {
      int jx = 0;
      double tx = 0.0;
      cell(to.coord(ix), jx, tx);
      const Complex v00 = values[from.index(jx, jy)];
      const Complex v10 = values[from.index(jx + 1, jy)];
      const Complex v01 = values[from.index(jx, jy + 1)];
      const Complex v11 = values[from.index(jx + 1, jy + 1)];
      out[to.index(ix, iy)] = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) +
                              ty * ((1.0 - tx) * v01 + tx * v11);
    }
  }
  return out;
}

ScatteringData to_odd_grid(const ScatteringData& s, int m) {
  if (m < 1) throw Error("odd grid half-size must be positive");
  ScatteringData out = s;
  ScatteringGrid odd;
  odd.grid = {2 * m + 1, s.source.grid.extent};

  ScatteringGrid src = s.source;
  const int n = src.grid.n;
  if (n % 2 == 1) {
    // The origin is never solved; fill it from its neighbours so that
    // interpolation does not pull towards zero.
    const int c = n / 2;
    for (auto* f : {&src.s12, &src.s21}) {
      (*f)[src.grid.index(c, c)] =
          0.25 * ((*f)[src.grid.index(c - 1, c)] + (*f)[src.grid.index(c + 1, c)] +
                  (*f)[src.grid.index(c, c - 1)] + (*f)[src.grid.index(c, c + 1)]);
    }
  }
  odd.s12 = bilinear_resample(src.grid, src.s12, odd.grid);
  odd.s21 = bilinear_resample(src.grid, src.s21, odd.grid);
  out.odd = std::move(odd);
  if (out.truncation) {
    TruncationReport ignored;
    truncate_grid(*out.odd, *out.truncation, ignored);
  }
  return out;
}

void save_scattering_csv(const ScatteringGrid& s, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot write " + path.string());
  std::fprintf(f, "# n=%d extent=%.17g\n", s.grid.n, s.grid.extent);
  std::fprintf(f, "k_re,k_im,s12_re,s12_im,s21_re,s21_im\n");
  for (int iy = 0; iy < s.grid.n; ++iy) {
    for (int ix = 0; ix < s.grid.n; ++ix) {
      const Complex k = s.grid.point(ix, iy);
      const std::size_t idx = s.grid.index(ix, iy);
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", k.real(), k.imag(),
                   s.s12[idx].real(), s.s12[idx].imag(), s.s21[idx].real(),
                   s.s21[idx].imag());
    }
  }
  std::fclose(f);
}

ScatteringGrid load_scattering_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  ScatteringGrid g;
  std::string line;
  std::getline(in, line);
  if (std::sscanf(line.c_str(), "# n=%d extent=%lf", &g.grid.n, &g.grid.extent) != 2) {
    throw Error("scattering CSV: malformed header");
  }
  std::getline(in, line);
  g.s12.reserve(g.grid.size());
  g.s21.reserve(g.grid.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[6];
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3],
                    &v[4], &v[5]) != 6) {
      throw Error("scattering CSV: malformed row");
    }
    g.s12.emplace_back(v[2], v[3]);
    g.s21.emplace_back(v[4], v[5]);
  }
  if (g.s12.size() != g.grid.size()) throw Error("scattering CSV: wrong row count");
  return g;
}

}  // namespace dbareit
