#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <fftw3.h>

#include "dbareit/dbar_solver.hpp"

namespace oracle {

using dbareit::kI;
using dbareit::kPi;

Complex radial_dn_riccati(const std::function<Complex(double)>& gamma, int n,
                          std::vector<double> breaks, int steps_per_unit) {
  const double an = std::abs(n);
  const double t0 = std::log(1e-8);
  std::vector<double> knots = {t0};
  std::sort(breaks.begin(), breaks.end());
  for (double b : breaks) {
    if (b > 0.0 && b < 1.0) knots.push_back(std::log(b));
  }
  knots.push_back(0.0);

  // f ~ r^|n| near the origin.
  Complex y = gamma(std::exp(t0)) * an;
  auto rhs = [&](double t, Complex yv, double side) {
    // side nudges the sample inside the current segment at its ends.
    const Complex g = gamma(std::exp(t + side));
    return an * an * g - yv * yv / g;
  };
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double a = knots[s];
    const double b = knots[s + 1];
    const int steps = std::max(200, static_cast<int>((b - a) * steps_per_unit));
    const double h = (b - a) / steps;
    for (int i = 0; i < steps; ++i) {
      const double t = a + i * h;
      const double lo = i == 0 ? 1e-12 : 0.0;
      const double hi = i + 1 == steps ? -1e-12 : 0.0;
      const Complex k1 = rhs(t, y, lo);
      const Complex k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1, 0.0);
      const Complex k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2, 0.0);
      const Complex k4 = rhs(t + h, y + h * k3, hi);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return y;
}

ComplexField direct_cauchy(const SquareGrid& g, const ComplexField& f, bool conjugate) {
  const double h = g.spacing();
  ComplexField out(g.size(), 0.0);
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      Complex acc = 0.0;
      for (int jy = 0; jy < g.n; ++jy) {
        for (int jx = 0; jx < g.n; ++jx) {
          if (ix == jx && iy == jy) continue;
          Complex d = g.point(ix, iy) - g.point(jx, jy);
          if (conjugate) d = std::conj(d);
          acc += f[g.index(jx, jy)] / (kPi * d);
        }
      }
      out[g.index(ix, iy)] = h * h * acc;
    }
  }
  return out;
}

Complex GaussianBump::gamma(Complex z) const { return 1.0 + a * std::exp(-std::norm(z - c) / s); }
Complex GaussianBump::dz(Complex z) const {
  return a * std::exp(-std::norm(z - c) / s) * (-std::conj(z - c) / s);
}
Complex GaussianBump::dzbar(Complex z) const {
  return a * std::exp(-std::norm(z - c) / s) * (-(z - c) / s);
}

namespace {

int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

void fft2(std::vector<Complex>& data, int p, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = fftw_plan_dft_2d(p, p, ptr, ptr, sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

}  // namespace

ZDomainCgo::ZDomainCgo(const SquareGrid& grid, ComplexField q12, ComplexField q21)
    : grid_(grid), q12_(std::move(q12)), q21_(std::move(q21)) {
  const int n = grid.n;
  p_ = next_pow2(2 * n);
  const double h = grid.spacing();
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<Complex> k(static_cast<std::size_t>(p_) * p_, 0.0);
    for (int dy = -(n - 1); dy <= n - 1; ++dy) {
      for (int dx = -(n - 1); dx <= n - 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        Complex d(dx * h, dy * h);
        if (pass == 1) d = std::conj(d);
        k[static_cast<std::size_t>((dy + p_) % p_) * p_ + (dx + p_) % p_] = 1.0 / (kPi * d);
      }
    }
    fft2(k, p_, FFTW_FORWARD);
    (pass == 0 ? kernel_hat_ : kernel_conj_hat_) = std::move(k);
  }
}

ZDomainCgo::~ZDomainCgo() = default;

ComplexField ZDomainCgo::convolve(const ComplexField& f, bool conjugate) const {
  const int n = grid_.n;
  const double h = grid_.spacing();
  std::vector<Complex> buf(static_cast<std::size_t>(p_) * p_, 0.0);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) buf[static_cast<std::size_t>(iy) * p_ + ix] = f[grid_.index(ix, iy)];
  }
  fft2(buf, p_, FFTW_FORWARD);
  const auto& kh = conjugate ? kernel_conj_hat_ : kernel_hat_;
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= kh[i];
  fft2(buf, p_, FFTW_BACKWARD);
  ComplexField out(grid_.size());
  const double scale = h * h / (static_cast<double>(p_) * p_);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      out[grid_.index(ix, iy)] = buf[static_cast<std::size_t>(iy) * p_ + ix] * scale;
    }
  }
  return out;
}

ZDomainCgo::Fields ZDomainCgo::solve(Complex k, double tol) const {
  const std::size_t m = grid_.size();
  const auto mm = static_cast<Eigen::Index>(m);
  ComplexField ek(m), emk(m), ekb(m), emkb(m);
  for (int iy = 0; iy < grid_.n; ++iy) {
    for (int ix = 0; ix < grid_.n; ++ix) {
      const Complex z = grid_.point(ix, iy);
      const std::size_t i = grid_.index(ix, iy);
      ek[i] = dbareit::plane_wave(z, k);
      emk[i] = dbareit::plane_wave(z, -k);
      ekb[i] = dbareit::plane_wave(z, std::conj(k));
      emkb[i] = dbareit::plane_wave(z, -std::conj(k));
    }
  }
  Fields f;
  // System (M11, M21).
  {
    dbareit::LinearOperator op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      ComplexField a(m), b(m);
      for (std::size_t i = 0; i < m; ++i) {
        a[i] = q12_[i] * x[mm + static_cast<Eigen::Index>(i)];
        b[i] = ek[i] * q21_[i] * x[static_cast<Eigen::Index>(i)];
      }
      const ComplexField ca = convolve(a, false);
      const ComplexField cb = convolve(b, true);
      y.resize(2 * mm);
      for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        y[ii] = x[ii] - ca[i];
        y[mm + ii] = x[mm + ii] - emk[i] * cb[i];
      }
    };
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(2 * mm);
    rhs.head(mm).setOnes();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(2 * mm);
    dbareit::gmres(op, rhs, x, 60, tol, 2000);
    f.m11.assign(x.data(), x.data() + m);
    f.m21.assign(x.data() + m, x.data() + 2 * m);
  }
  // System (M12, M22).
  {
    dbareit::LinearOperator op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      ComplexField a(m), b(m);
      for (std::size_t i = 0; i < m; ++i) {
        a[i] = emkb[i] * q12_[i] * x[mm + static_cast<Eigen::Index>(i)];
        b[i] = q21_[i] * x[static_cast<Eigen::Index>(i)];
      }
      const ComplexField ca = convolve(a, false);
      const ComplexField cb = convolve(b, true);
      y.resize(2 * mm);
      for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        y[ii] = x[ii] - ekb[i] * ca[i];
        y[mm + ii] = x[mm + ii] - cb[i];
      }
    };
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(2 * mm);
    rhs.tail(mm).setOnes();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(2 * mm);
    dbareit::gmres(op, rhs, x, 60, tol, 2000);
    f.m12.assign(x.data(), x.data() + m);
    f.m22.assign(x.data() + m, x.data() + 2 * m);
  }
  return f;
}

std::pair<Complex, Complex> ZDomainCgo::scattering(Complex k, const Fields& f) const {
  const double h = grid_.spacing();
  Complex s12 = 0.0;
  Complex s21 = 0.0;
  for (int iy = 0; iy < grid_.n; ++iy) {
    for (int ix = 0; ix < grid_.n; ++ix) {
      const Complex z = grid_.point(ix, iy);
      const std::size_t i = grid_.index(ix, iy);
      s12 += q12_[i] * dbareit::plane_wave(z, -std::conj(k)) * f.m22[i];
      s21 += q21_[i] * dbareit::plane_wave(z, k) * f.m11[i];
    }
  }
  return {kI / kPi * h * h * s12, -kI / kPi * h * h * s21};
}

Complex ZDomainCgo::interpolate(const ComplexField& f, Complex z) const {
  const double h = grid_.spacing();
  const double fx = (z.real() + grid_.extent) / h;
  const double fy = (z.imag() + grid_.extent) / h;
  const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_.n - 2);
  const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_.n - 2);
  const double tx = fx - ix;
  const double ty = fy - iy;
  return (1 - ty) * ((1 - tx) * f[grid_.index(ix, iy)] + tx * f[grid_.index(ix + 1, iy)]) +
         ty * ((1 - tx) * f[grid_.index(ix, iy + 1)] + tx * f[grid_.index(ix + 1, iy + 1)]);
}

}  // namespace oracle
