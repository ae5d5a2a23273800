#include "dbareit/dbar_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include <fftw3.h>

namespace dbareit {
namespace {

// The FFTW planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool seven_smooth(int v) {
  for (int p : {2, 3, 5, 7}) {
    while (v % p == 0) v /= p;
  }
  return v == 1;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

GmresResult gmres(const LinearOperator& op, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
                  int restart, double tol, int max_iter) {
  if (restart < 1 || max_iter < 1 || !(tol > 0.0)) throw Error("invalid GMRES settings");
  const Eigen::Index n = b.size();
  if (x.size() != n) x = Eigen::VectorXcd::Zero(n);
  GmresResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }

  Eigen::MatrixXcd v(n, restart + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(restart + 1, restart);
  Eigen::VectorXcd g(restart + 1);
  std::vector<double> cs(restart);
  std::vector<Complex> sn(restart);
  Eigen::VectorXcd w(n);
  Eigen::VectorXcd r(n);

  auto true_residual = [&] {
    op(x, r);
    r = b - r;
    return r.norm() / bnorm;
  };

  double rel = 1.0;
  if (x.isZero(0.0)) {
    r = b;
  } else {
    rel = true_residual();
  }
  while (rel > tol && res.iterations < max_iter) {
    const double beta = r.norm();
    v.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    h.setZero();
    int k = 0;
    for (int j = 0; j < restart && res.iterations < max_iter; ++j) {
      op(v.col(j), w);
      ++res.iterations;
      for (int i = 0; i <= j; ++i) {
        h(i, j) = v.col(i).dot(w);
        w -= h(i, j) * v.col(i);
      }
      const double hnext = w.norm();
      h(j + 1, j) = hnext;
      for (int i = 0; i < j; ++i) {
        const Complex a = h(i, j);
        const Complex c = h(i + 1, j);
        h(i, j) = cs[i] * a + sn[i] * c;
        h(i + 1, j) = -std::conj(sn[i]) * a + cs[i] * c;
      }
      const Complex a = h(j, j);
      const Complex c = h(j + 1, j);
      const double rr = std::hypot(std::abs(a), std::abs(c));
      if (std::abs(a) == 0.0) {
        cs[j] = 0.0;
        sn[j] = 1.0;
      } else {
        cs[j] = std::abs(a) / rr;
        sn[j] = (a / std::abs(a)) * std::conj(c) / rr;
      }
      h(j, j) = cs[j] * a + sn[j] * c;
      h(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];
      k = j + 1;
      const bool breakdown = hnext <= 1e-14 * beta;
      if (!breakdown) v.col(j + 1) = w / hnext;
      if (std::abs(g[j + 1]) / bnorm <= tol || breakdown) break;
    }
    const Eigen::VectorXcd y =
        h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    x += v.leftCols(k) * y;
    rel = true_residual();
  }
  res.residual = rel;
  res.converged = rel <= tol;
  return res;
}

DbarConvergenceError::DbarConvergenceError(Complex z, double residual, int iterations)
    : Error([&] {
        std::ostringstream os;
        os << "D-bar solve did not converge at z = " << z.real()
           << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i: residual "
           << residual << " after " << iterations << " iterations";
        return os.str();
      }()),
      z_(z),
      residual_(residual) {}

int padded_fft_size(int n) {
  if (n < 1) throw Error("grid size must be positive");
  int p = 2 * n - 1;
  while (p % 8 != 0 || !seven_smooth(p)) ++p;
  return p;
}

CauchyKernelGrid::CauchyKernelGrid(const SquareGrid& grid, bool conjugate)
    : grid_(grid), conjugate_(conjugate), padded_(padded_fft_size(grid.n)) {
  const int p = padded_;
  const int n = grid.n;
  const double h = grid.spacing();
  spectrum_.assign(static_cast<std::size_t>(p) * p, 0.0);
  for (int dy = -(n - 1); dy <= n - 1; ++dy) {
    for (int dx = -(n - 1); dx <= n - 1; ++dx) {
      const int px = (dx + p) % p;
      const int py = (dy + p) % p;
      spectrum_[static_cast<std::size_t>(py) * p + px] = sample(dx, dy);
    }
  }
  std::vector<Complex> out(spectrum_.size());
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan plan = fftw_plan_dft_2d(p, p, as_fftw(spectrum_.data()), as_fftw(out.data()),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  const double scale = h * h / (static_cast<double>(p) * p);
  for (std::size_t i = 0; i < out.size(); ++i) spectrum_[i] = out[i] * scale;
}

Complex CauchyKernelGrid::sample(int dx, int dy) const {
  if (dx == 0 && dy == 0) return 0.0;
  const double h = grid_.spacing();
  return 1.0 / (kPi * h * Complex(dx, conjugate_ ? -dy : dy));
}

// Only the first n rows of the padded input are nonzero and only the first n
// rows of the output are kept, so the row transforms are pruned to n rows.
struct CauchyConvolver::Plans {
  int n = 0;
  int p = 0;
  fftw_complex* buf = nullptr;
  fftw_plan rows_forward = nullptr;
  fftw_plan cols_forward = nullptr;
  fftw_plan cols_backward = nullptr;
  fftw_plan rows_backward = nullptr;
};

CauchyConvolver::CauchyConvolver(std::shared_ptr<const CauchyKernelGrid> kernel)
    : kernel_(std::move(kernel)), plans_(std::make_unique<Plans>()) {
  Plans& pl = *plans_;
  pl.n = kernel_->grid().n;
  pl.p = kernel_->padded();
  int len[1] = {pl.p};
  std::lock_guard<std::mutex> lock(planner_mutex());
  pl.buf = fftw_alloc_complex(static_cast<std::size_t>(pl.p) * pl.p);
  auto rows = [&](int sign) {
    return fftw_plan_many_dft(1, len, pl.n, pl.buf, nullptr, 1, pl.p, pl.buf, nullptr, 1, pl.p,
                              sign, FFTW_ESTIMATE);
  };
  auto cols = [&](int sign) {
    return fftw_plan_many_dft(1, len, pl.p, pl.buf, nullptr, pl.p, 1, pl.buf, nullptr, pl.p, 1,
                              sign, FFTW_ESTIMATE);
  };
  pl.rows_forward = rows(FFTW_FORWARD);
  pl.cols_forward = cols(FFTW_FORWARD);
  pl.cols_backward = cols(FFTW_BACKWARD);
  pl.rows_backward = rows(FFTW_BACKWARD);
}

CauchyConvolver::~CauchyConvolver() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  for (fftw_plan plan : {plans_->rows_forward, plans_->cols_forward, plans_->cols_backward,
                         plans_->rows_backward}) {
    fftw_destroy_plan(plan);
  }
  fftw_free(plans_->buf);
}

void CauchyConvolver::apply(const Complex* in, Complex* out) {
  const int n = plans_->n;
  const std::size_t p = plans_->p;
  auto* buf = reinterpret_cast<Complex*>(plans_->buf);
  for (int iy = 0; iy < n; ++iy) {
    Complex* row = buf + iy * p;
    std::copy(in + static_cast<std::size_t>(iy) * n, in + static_cast<std::size_t>(iy + 1) * n,
              row);
    std::fill(row + n, row + p, Complex(0.0));
  }
  std::fill(buf + n * p, buf + p * p, Complex(0.0));
  fftw_execute(plans_->rows_forward);
  fftw_execute(plans_->cols_forward);
  const Complex* spec = kernel_->spectrum().data();
  for (std::size_t i = 0; i < p * p; ++i) buf[i] *= spec[i];
  fftw_execute(plans_->cols_backward);
  fftw_execute(plans_->rows_backward);
  for (int iy = 0; iy < n; ++iy) {
    std::copy(buf + iy * p, buf + iy * p + n, out + static_cast<std::size_t>(iy) * n);
  }
}

DbarSolver::DbarSolver(const ScatteringGrid& odd, std::shared_ptr<const CauchyKernelGrid> kernel,
                       DbarSettings settings)
    : odd_(&odd), settings_(settings), conv_(std::move(kernel)) {
  if (odd.grid.n % 2 == 0) throw Error("the D-bar grid must have an odd size");
  if (!(conv_.kernel().grid() == odd.grid)) throw Error("kernel grid does not match");
  if (!(settings.tol > 0.0)) throw Error("D-bar tolerance must be positive");
  const std::size_t m = odd.grid.size();
  w12_.resize(m);
  w21_.resize(m);
  tmp_in_.resize(m);
  tmp_out_.resize(m);
}

void DbarSolver::set_weights(Complex z) {
  const SquareGrid& g = odd_->grid;
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      const std::size_t idx = g.index(ix, iy);
      const Complex k = g.point(ix, iy);
      const Complex s21 = odd_->s21[idx];
      const Complex s12 = odd_->s12[idx];
      // Truncated samples are exactly zero; skip their exponentials.
      w21_[idx] = s21 == Complex(0.0) ? Complex(0.0) : plane_wave(z, -k) * s21;
      w12_[idx] = s12 == Complex(0.0) ? Complex(0.0) : plane_wave(z, std::conj(k)) * s12;
    }
  }
}

// y = [x1 - C[flip(x2) wa]; x2 - C[flip(x1) wb]]
void DbarSolver::apply_system(const ComplexField& wa, const ComplexField& wb,
                              const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  const SquareGrid& g = odd_->grid;
  const auto m = static_cast<Eigen::Index>(g.size());
  y.resize(2 * m);
  for (int half = 0; half < 2; ++half) {
    const Complex* src = x.data() + (half == 0 ? m : 0);
    const ComplexField& w = half == 0 ? wa : wb;
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      tmp_in_[i] = src[flip_index(g, i)] * w[i];
      any = any || tmp_in_[i] != Complex(0.0);
    }
    const Complex* self = x.data() + half * m;
    Complex* dst = y.data() + half * m;
    if (!any) {
      std::copy(self, self + m, dst);
      continue;
    }
    conv_.apply(tmp_in_.data(), tmp_out_.data());
    for (Eigen::Index i = 0; i < m; ++i) dst[i] = self[i] - tmp_out_[i];
  }
}

DbarPointResult DbarSolver::solve(Complex z, bool keep_fields) {
  const SquareGrid& g = odd_->grid;
  const auto m = static_cast<Eigen::Index>(g.size());
  const std::size_t center = g.index(g.n / 2, g.n / 2);
  set_weights(z);

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(2 * m);
  b.head(m).setOnes();
  DbarPointResult out;

  // System A: (M11, M12); system B: (M22, M21).
  for (int sys = 0; sys < 2; ++sys) {
    const ComplexField& wa = sys == 0 ? w21_ : w12_;
    const ComplexField& wb = sys == 0 ? w12_ : w21_;
    LinearOperator op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      apply_system(wa, wb, x, y);
    };
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(2 * m);
    const GmresResult r =
        gmres(op, b, x, settings_.restart, settings_.tol, settings_.max_iter);
    const Complex first = x[static_cast<Eigen::Index>(center)];
    const Complex second = x[m + static_cast<Eigen::Index>(center)];
    if (sys == 0) {
      out.m11 = first;
      out.m12 = second;
      out.iterations_a = r.iterations;
      out.residual_a = r.residual;
    } else {
      out.m22 = first;
      out.m21 = second;
      out.iterations_b = r.iterations;
      out.residual_b = r.residual;
    }
    out.converged = out.converged && r.converged;
    if (keep_fields) {
      ComplexField f1(x.data(), x.data() + m);
      ComplexField f2(x.data() + m, x.data() + 2 * m);
      if (sys == 0) {
        out.f11 = std::move(f1);
        out.f12 = std::move(f2);
      } else {
        out.f22 = std::move(f1);
        out.f21 = std::move(f2);
      }
    }
  }
  return out;
}

double DbarSolver::residual(Complex z, int which, const ComplexField& first,
                            const ComplexField& second) {
  const auto m = static_cast<Eigen::Index>(odd_->grid.size());
  set_weights(z);
  Eigen::VectorXcd x(2 * m);
  std::copy(first.begin(), first.end(), x.data());
  std::copy(second.begin(), second.end(), x.data() + m);
  Eigen::VectorXcd y;
  if (which == 0) {
    apply_system(w21_, w12_, x, y);
  } else {
    apply_system(w12_, w21_, x, y);
  }
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(2 * m);
  b.head(m).setOnes();
  return (y - b).norm() / b.norm();
}

DbarPointResult solve_dbar_at_z(const ScatteringData& s, Complex z,
                                const DbarSettings& settings, bool keep_fields) {
  if (!s.odd) throw Error("scattering data has no odd grid");
  auto kernel = std::make_shared<const CauchyKernelGrid>(s.odd->grid);
  DbarSolver solver(*s.odd, kernel, settings);
  DbarPointResult r = solver.solve(z, keep_fields);
  if (!r.converged) {
    throw DbarConvergenceError(z, std::max(r.residual_a, r.residual_b),
                               std::max(r.iterations_a, r.iterations_b));
  }
  return r;
}

CgoFieldAtZero CgoFieldAtZero::identity(const SquareGrid& g) {
  CgoFieldAtZero f;
  f.z_grid = g;
  f.m11.assign(g.size(), 1.0);
  f.m22.assign(g.size(), 1.0);
  f.m12.assign(g.size(), 0.0);
  f.m21.assign(g.size(), 0.0);
  f.solved.assign(g.size(), 0);
  return f;
}

DbarRunResult solve_all_z(const ScatteringData& s, const SquareGrid& z_grid,
                          const DbarSettings& settings, int workers, double solve_radius) {
  if (!s.odd) throw Error("scattering data has no odd grid");
  if (z_grid.n < 3) throw Error("z-grid needs at least 3 points per axis");
  DbarRunResult run;
  run.field = CgoFieldAtZero::identity(z_grid);

  std::vector<std::size_t> points;
  for (int iy = 0; iy < z_grid.n; ++iy) {
    for (int ix = 0; ix < z_grid.n; ++ix) {
      if (std::abs(z_grid.point(ix, iy)) <= solve_radius) points.push_back(z_grid.index(ix, iy));
    }
  }
  std::vector<DbarPointResult> results(points.size());
  auto kernel = std::make_shared<const CauchyKernelGrid>(s.odd->grid);
  const auto count = static_cast<std::ptrdiff_t>(points.size());

#pragma omp parallel num_threads(workers > 0 ? workers : 1)
  {
    DbarSolver solver(*s.odd, kernel, settings);
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const std::size_t idx = points[i];
      results[i] = solver.solve(
          z_grid.point(static_cast<int>(idx % z_grid.n), static_cast<int>(idx / z_grid.n)));
    }
  }

  CgoFieldAtZero& f = run.field;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t idx = points[i];
    const DbarPointResult& r = results[i];
    f.m11[idx] = r.m11;
    f.m12[idx] = r.m12;
    f.m21[idx] = r.m21;
    f.m22[idx] = r.m22;
    f.solved[idx] = 1;
    run.max_iterations = std::max({run.max_iterations, r.iterations_a, r.iterations_b});
    run.max_residual = std::max({run.max_residual, r.residual_a, r.residual_b});
    if (!r.converged) {
      const int ix = static_cast<int>(idx % z_grid.n);
      const int iy = static_cast<int>(idx / z_grid.n);
      run.failures.push_back(
          {ix, iy, z_grid.point(ix, iy), std::max(r.residual_a, r.residual_b)});
    }
  }
  run.solved_points = points.size();
  return run;
}

void save_m_fields(const CgoFieldAtZero& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const std::int32_t n = f.z_grid.n;
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (const ComplexField* c : {&f.m11, &f.m12, &f.m21, &f.m22}) {
    for (const Complex& v : *c) {
      const double pair[2] = {v.real(), v.imag()};
      out.write(reinterpret_cast<const char*>(pair), sizeof pair);
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

CgoFieldAtZero load_m_fields(const std::filesystem::path& path, double extent) {
  // Points are marked solved inside the disk of radius `extent`.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::int32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n < 1 || n > 1 << 14) throw Error("M-field file: bad header");
  CgoFieldAtZero f = CgoFieldAtZero::identity({n, extent});
  for (ComplexField* c : {&f.m11, &f.m12, &f.m21, &f.m22}) {
    for (Complex& v : *c) {
      double pair[2];
      in.read(reinterpret_cast<char*>(pair), sizeof pair);
      v = {pair[0], pair[1]};
    }
  }
  if (!in) throw Error("M-field file: truncated");
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      f.solved[f.z_grid.index(ix, iy)] = std::abs(f.z_grid.point(ix, iy)) <= extent ? 1 : 0;
    }
  }
  return f;
}

}  // namespace dbareit
