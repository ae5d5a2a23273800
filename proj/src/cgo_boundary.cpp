#include "dbareit/cgo_boundary.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace dbareit {

KGrid KGrid::make(double cutoff, int n) {
  if (!(cutoff > 0.0)) throw Error("k-grid cutoff must be positive");
  if (n < 2) throw Error("k-grid needs at least two points per axis");
  KGrid g;
  g.grid = {n, cutoff};
  g.valid.assign(g.grid.size(), 1);
  if (n % 2 == 1) g.valid[g.grid.index(n / 2, n / 2)] = 0;
  return g;
}

double g0_kernel(Complex z, Complex zeta) {
  const double r = std::abs(z - zeta);
  if (r == 0.0) return 0.0;
  return std::log(r) / (2.0 * kPi);
}

Complex psi12_kernel(Complex z, Complex zeta, Complex k) {
  const Complex d = z - zeta;
  if (d == Complex(0.0)) return 0.0;
  return std::exp(kI * std::conj(k) * d) / (4.0 * kPi * d);
}

Complex psi21_kernel(Complex z, Complex zeta, Complex k) {
  const Complex d = z - zeta;
  if (d == Complex(0.0)) return 0.0;
  return std::conj(std::exp(kI * k * d) / (4.0 * kPi * d));
}

const char* trace_rule_name(TraceRule r) {
  return r == TraceRule::kBoundaryJump ? "boundary_jump" : "drop_node";
}

TraceRule parse_trace_rule(const std::string& name) {
  if (name == "drop_node") return TraceRule::kDropNode;
  if (name == "boundary_jump") return TraceRule::kBoundaryJump;
  throw Error("unknown trace rule '" + name + "' (expected drop_node or boundary_jump)");
}

const char* g0_sign_name(G0Sign s) { return s == G0Sign::kFundamental ? "fundamental" : "plus"; }

G0Sign parse_g0_sign(const std::string& name) {
  if (name == "plus") return G0Sign::kPlus;
  if (name == "fundamental") return G0Sign::kFundamental;
  throw Error("unknown g0 sign '" + name + "' (expected plus or fundamental)");
}

namespace {

void add_jump(PsiTraces& p, const Eigen::VectorXcd& delta_u1, const Eigen::VectorXcd& delta_u2,
              const std::vector<Complex>& nodes) {
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    const auto i = static_cast<Eigen::Index>(l);
    p.psi12[i] += 0.25 * std::conj(nodes[l]) * delta_u2[i];
    p.psi21[i] += 0.25 * nodes[l] * delta_u1[i];
  }
}

}  // namespace

ExceptionalPointError::ExceptionalPointError(Complex k, double rcond)
    : Error([&] {
        std::ostringstream os;
        os << "boundary integral system is singular at k = " << k.real()
           << (k.imag() < 0 ? " - " : " + ") << std::abs(k.imag())
           << "i (rcond " << rcond << "); possible exceptional point";
        return os.str();
      }()),
      k_(k),
      rcond_(rcond) {}

CgoBoundarySolver::CgoBoundarySolver(const DeltaDN& delta, BoundaryOptions options)
    : delta_(&delta), options_(options) {
  const int L = delta.electrode_count();
  for (double a : delta.electrode_angles()) nodes_.push_back(std::polar(1.0, a));
  weight_ = 2.0 * kPi / L;

  Eigen::MatrixXd g(L, L);
  for (int m = 0; m < L; ++m) {
    for (int l = 0; l < L; ++l) g(m, l) = g0_kernel(nodes_[m], nodes_[l]);
  }
  const double sign = options_.g0_sign == G0Sign::kFundamental ? -1.0 : 1.0;
  system_ = Eigen::MatrixXcd::Identity(L, L) +
            (sign * weight_) * g.cast<Complex>() * delta.point_operator();
  lu_.compute(system_);
  rcond_ = lu_.rcond();
}

Eigen::VectorXcd CgoBoundarySolver::incident_u1(Complex k) const {
  Eigen::VectorXcd v(nodes_.size());
  for (std::size_t l = 0; l < nodes_.size(); ++l) {
    v[l] = std::exp(kI * k * nodes_[l]) / (kI * k);
  }
  return v;
}

Eigen::VectorXcd CgoBoundarySolver::incident_u2(Complex k) const {
  Eigen::VectorXcd v(nodes_.size());
  for (std::size_t l = 0; l < nodes_.size(); ++l) {
    v[l] = std::exp(-kI * k * std::conj(nodes_[l])) / (-kI * k);
  }
  return v;
}

UTraces CgoBoundarySolver::solve_u(Complex k) const {
  if (k == Complex(0.0) || !well_conditioned()) throw ExceptionalPointError(k, rcond_);
  UTraces t;
  // G0(z - zeta) = G0(-conj z + conj zeta), so both traces share the operator.
  t.u1 = lu_.solve(incident_u1(k));
  t.u2 = lu_.solve(incident_u2(k));
  t.delta_u1 = delta_->apply(t.u1);
  t.delta_u2 = delta_->apply(t.u2);
  return t;
}

PsiTraces CgoBoundarySolver::psi(const UTraces& traces, Complex k) const {
  const int L = static_cast<int>(nodes_.size());
  PsiTraces p;
  p.psi12 = Eigen::VectorXcd::Zero(L);
  p.psi21 = Eigen::VectorXcd::Zero(L);
  for (int m = 0; m < L; ++m) {
    Complex s12 = 0.0;
    Complex s21 = 0.0;
    for (int l = 0; l < L; ++l) {
      s12 += psi12_kernel(nodes_[m], nodes_[l], k) * traces.delta_u2[l];
      s21 += psi21_kernel(nodes_[m], nodes_[l], k) * traces.delta_u1[l];
    }
    p.psi12[m] = weight_ * s12;
    p.psi21[m] = weight_ * s21;
  }
  if (options_.trace_rule == TraceRule::kBoundaryJump) add_jump(p, traces.delta_u1, traces.delta_u2, nodes_);
  return p;
}

double CgoBoundarySolver::residual(const UTraces& traces, Complex k) const {
  const auto b1 = incident_u1(k);
  const auto b2 = incident_u2(k);
  const double r1 = (system_ * traces.u1 - b1).norm() / b1.norm();
  const double r2 = (system_ * traces.u2 - b2).norm() / b2.norm();
  return std::max(r1, r2);
}

UTraces solve_u_traces(const DeltaDN& delta, Complex k, BoundaryOptions options) {
  return CgoBoundarySolver(delta, options).solve_u(k);
}

PsiTraces psi_traces(const Eigen::VectorXcd& delta_u1, const Eigen::VectorXcd& delta_u2,
                     Complex k, const std::vector<double>& electrode_angles,
                     TraceRule rule) {
  const int L = static_cast<int>(electrode_angles.size());
  if (delta_u1.size() != L || delta_u2.size() != L) {
    throw Error("trace length does not match the electrode count");
  }
  std::vector<Complex> nodes;
  for (double a : electrode_angles) nodes.push_back(std::polar(1.0, a));
  const double w = 2.0 * kPi / L;
  PsiTraces p;
  p.psi12 = Eigen::VectorXcd::Zero(L);
  p.psi21 = Eigen::VectorXcd::Zero(L);
  for (int m = 0; m < L; ++m) {
    for (int l = 0; l < L; ++l) {
      p.psi12[m] += w * psi12_kernel(nodes[m], nodes[l], k) * delta_u2[l];
      p.psi21[m] += w * psi21_kernel(nodes[m], nodes[l], k) * delta_u1[l];
    }
  }
  if (rule == TraceRule::kBoundaryJump) add_jump(p, delta_u1, delta_u2, nodes);
  return p;
}

CGOTraceSet compute_traces(const DeltaDN& delta, const KGrid& grid, int workers,
                           BoundaryOptions options) {
  const CgoBoundarySolver solver(delta, options);
  const int L = delta.electrode_count();
  const auto nk = static_cast<Eigen::Index>(grid.size());

  CGOTraceSet set;
  set.grid = grid;
  set.electrode_angles = delta.electrode_angles();
  set.rcond = solver.rcond();
  set.valid = grid.valid;
  for (auto* m : {&set.u1, &set.u2, &set.psi12, &set.psi21, &set.delta_u1, &set.delta_u2}) {
    m->setZero(L, nk);
  }
  if (!solver.well_conditioned()) {
    std::fill(set.valid.begin(), set.valid.end(), 0);
    return set;
  }

#pragma omp parallel for schedule(static) num_threads(workers > 0 ? workers : 1)
  for (Eigen::Index j = 0; j < nk; ++j) {
    if (!set.valid[j]) continue;
    const Complex k = grid.point(static_cast<std::size_t>(j));
    const UTraces u = solver.solve_u(k);
    const PsiTraces p = solver.psi(u, k);
    set.u1.col(j) = u.u1;
    set.u2.col(j) = u.u2;
    set.delta_u1.col(j) = u.delta_u1;
    set.delta_u2.col(j) = u.delta_u2;
    set.psi12.col(j) = p.psi12;
    set.psi21.col(j) = p.psi21;
  }
  return set;
}

void save_traces_csv(const CGOTraceSet& traces, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot write " + path.string());
  std::fprintf(f,
               "k_re,k_im,electrode,valid,u1_re,u1_im,u2_re,u2_im,psi12_re,psi12_im,"
               "psi21_re,psi21_im\n");
  for (std::size_t j = 0; j < traces.grid.size(); ++j) {
    const Complex k = traces.grid.point(j);
    for (Eigen::Index l = 0; l < traces.u1.rows(); ++l) {
      const auto col = static_cast<Eigen::Index>(j);
      std::fprintf(f, "%.17g,%.17g,%ld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                   k.real(), k.imag(), static_cast<long>(l), traces.valid[j],
                   traces.u1(l, col).real(), traces.u1(l, col).imag(),
                   traces.u2(l, col).real(), traces.u2(l, col).imag(),
                   traces.psi12(l, col).real(), traces.psi12(l, col).imag(),
                   traces.psi21(l, col).real(), traces.psi21(l, col).imag());
    }
  }
  std::fclose(f);
}

}  // namespace dbareit
