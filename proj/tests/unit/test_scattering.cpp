#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "dbareit/scattering.hpp"

using namespace dbareit;

namespace {

std::vector<double> angles(int L) {
  std::vector<double> a(L);
  for (int l = 0; l < L; ++l) a[l] = 2.0 * kPi * l / L;
  return a;
}

Eigen::VectorXcd random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = {d(rng), d(rng)};
  return v;
}

ScatteringData affine_data(int n, double extent, Complex a, Complex bx, Complex by) {
  ScatteringData s;
  s.source.grid = {n, extent};
  s.source.s12.resize(s.source.grid.size());
  s.source.s21.resize(s.source.grid.size());
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Complex k = s.source.grid.point(ix, iy);
      const Complex v = a + bx * k.real() + by * k.imag();
      s.source.s12[s.source.grid.index(ix, iy)] = v;
      s.source.s21[s.source.grid.index(ix, iy)] = 2.0 * v;
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("scattering") {
  TEST_CASE("finite sums on synthetic traces") {
    // Psi12 = conj(z) e^{i conj(k) z} and Psi21 = z e^{-i conj(k) conj(z)} make
    // every summand 1 on the unit circle.
    const int L = 32;
    const auto a = angles(L);
    for (Complex k : {Complex(0.4, -1.3), Complex(-3.0, 2.0), Complex(5.0, 5.0)}) {
      Eigen::VectorXcd p12(L), p21(L);
      for (int l = 0; l < L; ++l) {
        const Complex z = std::polar(1.0, a[l]);
        p12[l] = std::conj(z) * std::exp(kI * std::conj(k) * z);
        p21[l] = z * std::exp(-kI * std::conj(k) * std::conj(z));
      }
      const auto [s12, s21] = scattering_at(p12, p21, k, a);
      CHECK(std::abs(s12 - kI) < 1e-12);
      CHECK(std::abs(s21 + kI) < 1e-12);
    }
  }

  TEST_CASE("linear in the traces") {
    const auto a = angles(16);
    const Complex k{1.5, -0.5};
    const Complex alpha{0.3, 2.0}, beta{-1.1, 0.4};
    const auto p = random_vector(16, 1), q = random_vector(16, 2);
    const auto r = random_vector(16, 3), t = random_vector(16, 4);
    const auto [p12, p21] = scattering_at(p, r, k, a);
    const auto [q12, q21] = scattering_at(q, t, k, a);
    const Eigen::VectorXcd mix1 = alpha * p + beta * q;
    const Eigen::VectorXcd mix2 = alpha * r + beta * t;
    const auto [m12, m21] = scattering_at(mix1, mix2, k, a);
    CHECK(std::abs(m12 - (alpha * p12 + beta * q12)) < 1e-12 * (1.0 + std::abs(m12)));
    CHECK(std::abs(m21 - (alpha * p21 + beta * q21)) < 1e-12 * (1.0 + std::abs(m21)));
  }

  TEST_CASE("compute_s skips invalid points") {
    CGOTraceSet t;
    t.grid = KGrid::make(2.0, 5);
    t.electrode_angles = angles(8);
    t.valid = t.grid.valid;
    t.psi12 = Eigen::MatrixXcd::Ones(8, 25);
    t.psi21 = Eigen::MatrixXcd::Ones(8, 25);
    const auto s = compute_s(t);
    CHECK(s.source.s12[12] == Complex(0.0));
    CHECK(s.source.s21[12] == Complex(0.0));
    CHECK(s.source.s12[0] != Complex(0.0));
    CHECK_FALSE(s.odd.has_value());
  }

  TEST_CASE("square and disk truncation") {
    CHECK(Truncation::square(1.0).keeps({1.0, -1.0}));
    CHECK_FALSE(Truncation::disk(1.0).keeps({1.0, -1.0}));
    CHECK(Truncation::disk(1.0).keeps({0.6, 0.8}));

    auto s = affine_data(9, 4.0, 1.0, 0.0, 0.0);
    TruncationReport rep;
    const auto d = truncate(s, Truncation::disk(4.0), &rep);
    // The four corners and their neighbours fall outside the inscribed disk.
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < d.source.grid.size(); ++i) {
      const bool outside = std::abs(d.source.grid.point(static_cast<int>(i % 9),
                                                        static_cast<int>(i / 9))) > 4.0;
      CHECK((d.source.s12[i] == Complex(0.0)) == outside);
      zeros += outside;
    }
    CHECK(rep.zeroed_outside == zeros);
    CHECK(d.source.s12[d.source.grid.index(0, 0)] == Complex(0.0));
    CHECK(d.source.s12[d.source.grid.index(4, 0)] == Complex(1.0));

    // Idempotent, and a square of the full extent changes nothing.
    const auto again = truncate(d, Truncation::disk(4.0), &rep);
    CHECK(again.source.s12 == d.source.s12);
    CHECK(rep.zeroed_outside == 0u);
    const auto sq = truncate(s, Truncation::square(4.0), &rep);
    CHECK(sq.source.s12 == s.source.s12);
    CHECK(rep.zeroed_outside == 0u);
    CHECK_THROWS_AS(truncate(s, Truncation::disk(0.0)), Error);
  }

  TEST_CASE("non-finite values are zeroed and counted") {
    auto s = affine_data(8, 2.0, {1.0, 1.0}, 0.0, 0.0);
    s.source.s12[3] = std::numeric_limits<double>::quiet_NaN();
    s.source.s21[10] = {0.0, std::numeric_limits<double>::infinity()};
    TruncationReport rep;
    const auto t = truncate(s, Truncation::square(2.0), &rep);
    CHECK(rep.zeroed_nonfinite == 2u);
    CHECK(t.source.s12[3] == Complex(0.0));
    CHECK(t.source.s21[10] == Complex(0.0));
    CHECK(t.source.s12[10] == Complex(0.0));
  }

  TEST_CASE("odd grid reproduces affine data and contains the origin") {
    const auto s = affine_data(16, 3.0, {0.5, -0.2}, {1.0, 0.3}, {-0.4, 2.0});
    const auto o = to_odd_grid(s, 10);
    REQUIRE(o.odd.has_value());
    CHECK(o.odd->grid.n == 21);
    CHECK(o.odd->grid.extent == 3.0);
    CHECK(o.odd->grid.point(10, 10) == Complex(0.0));
    CHECK(o.h_kappa() == doctest::Approx(0.3));
    double err = 0.0;
    for (int iy = 0; iy < 21; ++iy) {
      for (int ix = 0; ix < 21; ++ix) {
        const Complex k = o.odd->grid.point(ix, iy);
        const Complex v = Complex(0.5, -0.2) + Complex(1.0, 0.3) * k.real() +
                          Complex(-0.4, 2.0) * k.imag();
        err = std::max(err, std::abs(o.odd->s12[o.odd->grid.index(ix, iy)] - v));
        err = std::max(err, std::abs(o.odd->s21[o.odd->grid.index(ix, iy)] - 2.0 * v));
      }
    }
    CHECK(err < 1e-12);
    CHECK_THROWS_AS(to_odd_grid(s, 0), Error);
  }

  TEST_CASE("odd source grid fills the unsolved origin from its neighbours") {
    auto s = affine_data(5, 1.0, 1.0, 0.0, 0.0);
    s.source.s12[12] = 0.0;
    const auto o = to_odd_grid(s, 2);
    CHECK(std::abs(o.odd->s12[12] - 1.0) < 1e-14);
  }

  TEST_CASE("truncation carries over to a later odd grid") {
    const auto s = affine_data(16, 3.0, 1.0, 0.0, 0.0);
    const auto t = to_odd_grid(truncate(s, Truncation::disk(2.0)), 8);
    for (int iy = 0; iy < t.odd->grid.n; ++iy) {
      for (int ix = 0; ix < t.odd->grid.n; ++ix) {
        if (std::abs(t.odd->grid.point(ix, iy)) > 2.0) {
          CHECK(t.odd->s12[t.odd->grid.index(ix, iy)] == Complex(0.0));
        }
      }
    }
  }

  TEST_CASE("resampling refuses to extrapolate") {
    const auto s = affine_data(5, 1.0, 1.0, 0.0, 0.0);
    CHECK_THROWS_AS(bilinear_resample(s.source.grid, s.source.s12, SquareGrid{5, 2.0}), Error);
  }

  TEST_CASE("CSV round trip") {
    const auto s = affine_data(7, 2.5, {0.1, 0.2}, {1.0 / 3.0, 0.0}, {0.0, -2.0 / 7.0});
    const auto path = std::filesystem::temp_directory_path() / "dbareit_scattering_rt.csv";
    save_scattering_csv(s.source, path);
    const auto back = load_scattering_csv(path);
    CHECK(back.grid == s.source.grid);
    CHECK(back.s12 == s.source.s12);
    CHECK(back.s21 == s.source.s21);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_scattering_csv(path), Error);
  }
}
