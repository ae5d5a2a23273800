#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbareit/common.hpp"
#include "dbareit/dn_map.hpp"

namespace dbareit {

/// Uniform n x n grid of scattering frequencies over [-K, K]^2. The origin is
/// never a valid point (it is only present at all when n is odd).
struct KGrid {
  SquareGrid grid;
  std::vector<std::uint8_t> valid;

  static KGrid make(double cutoff, int n);
  double cutoff() const { return grid.extent; }
  Complex point(std::size_t idx) const {
    return grid.point(static_cast<int>(idx % grid.n), static_cast<int>(idx / grid.n));
  }
  std::size_t size() const { return grid.size(); }
};

/// Log kernel (1/2pi) log|z - zeta|, zero on the diagonal.
double g0_kernel(Complex z, Complex zeta);

/// Kernel of the Psi_12 trace formula, e^{i conj(k)(z - zeta)} / (4 pi (z - zeta)),
/// zero at z = zeta.
Complex psi12_kernel(Complex z, Complex zeta, Complex k);
/// Kernel of the Psi_21 trace formula, conj(e^{i k (z - zeta)} / (4 pi (z - zeta))),
/// zero at z = zeta.
Complex psi21_kernel(Complex z, Complex zeta, Complex k);

/// How the Psi trace integrals treat the singular node z = zeta.
///  kDropNode: the node is dropped and nothing else is added.
///  kBoundaryJump: additionally adds the single-layer jump term, which the
///    dropped node omits: Psi_12 += conj(nu) phi_2 / 4, Psi_21 += nu phi_1 / 4
///    with phi_j = (Lambda_gamma - Lambda_1) u_j.
enum class TraceRule { kDropNode, kBoundaryJump };

const char* trace_rule_name(TraceRule r);
TraceRule parse_trace_rule(const std::string& name);

/// Sign of the log kernel in the u1, u2 integral equations.
///  kPlus: G0 = +(1/2pi) log|z| exactly as written in the method.
///  kFundamental: G0 = -(1/2pi) log|z|, the fundamental solution of -Laplace,
///    consistent with a DN map whose homogeneous eigenvalues are +|n|.
enum class G0Sign { kPlus, kFundamental };
const char* g0_sign_name(G0Sign s);
G0Sign parse_g0_sign(const std::string& name);

/// Discretization choices for the boundary stage. The defaults are the
/// combination that agrees with directly computed CGO traces; {kDropNode,
/// kPlus} is the formulation exactly as written.
struct BoundaryOptions {
  TraceRule trace_rule = TraceRule::kBoundaryJump;
  G0Sign g0_sign = G0Sign::kFundamental;
};

struct UTraces {
  Eigen::VectorXcd u1;
  Eigen::VectorXcd u2;
  Eigen::VectorXcd delta_u1;  // (Lambda_gamma - Lambda_1) u1 at the centers
  Eigen::VectorXcd delta_u2;
};

struct PsiTraces {
  Eigen::VectorXcd psi12;
  Eigen::VectorXcd psi21;
};

class ExceptionalPointError : public Error {
 public:
  ExceptionalPointError(Complex k, double rcond);
  Complex k() const { return k_; }
  double rcond() const { return rcond_; }

 private:
  Complex k_;
  double rcond_;
};

/// Boundary integral equations for the exponentially growing traces u1, u2
/// at the electrode centers with the log kernel in place of the Faddeev
/// Green's function:
///   u1 = e^{ikz}/(ik) - int G0(z - zeta) [(Lambda_gamma - Lambda_1) u1](zeta) dS,
///   u2 = e^{-ik conj z}/(-ik) - int G0(-conj z + conj zeta) [...] u2 dS,
/// discretized with the trapezoid rule (ds = 2 pi / L) and the singular node
/// dropped. The sign of G0 and the treatment of the Psi traces follow
/// BoundaryOptions. The discrete operator does not depend on k, so it is
/// factored once.
class CgoBoundarySolver {
 public:
  /// Systems with a reciprocal condition estimate below this are treated as
  /// exceptional.
  static constexpr double kMinRcond = 1e-12;

  explicit CgoBoundarySolver(const DeltaDN& delta, BoundaryOptions options = {});

  bool well_conditioned() const { return rcond_ >= kMinRcond; }
  double rcond() const { return rcond_; }
  TraceRule rule() const { return options_.trace_rule; }
  const BoundaryOptions& options() const { return options_; }

  /// Throws ExceptionalPointError when the system is ill-conditioned or k = 0.
  UTraces solve_u(Complex k) const;
  PsiTraces psi(const UTraces& traces, Complex k) const;

  /// ||A u - b|| / ||b|| for both systems (max of the two).
  double residual(const UTraces& traces, Complex k) const;

  Eigen::VectorXcd incident_u1(Complex k) const;
  Eigen::VectorXcd incident_u2(Complex k) const;

  const std::vector<Complex>& nodes() const { return nodes_; }
  const Eigen::MatrixXcd& system_matrix() const { return system_; }

 private:
  const DeltaDN* delta_;
  std::vector<Complex> nodes_;
  double weight_;
  Eigen::MatrixXcd system_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double rcond_ = 0.0;
  BoundaryOptions options_;
};

UTraces solve_u_traces(const DeltaDN& delta, Complex k, BoundaryOptions options = {});
PsiTraces psi_traces(const Eigen::VectorXcd& delta_u1, const Eigen::VectorXcd& delta_u2,
                     Complex k, const std::vector<double>& electrode_angles,
                     TraceRule rule = TraceRule::kBoundaryJump);

/// Boundary traces for every point of a KGrid; column j belongs to grid index j.
struct CGOTraceSet {
  KGrid grid;
  Eigen::MatrixXcd u1, u2, psi12, psi21, delta_u1, delta_u2;
  std::vector<std::uint8_t> valid;  // 0 at the origin and at exceptional points
  std::vector<double> electrode_angles;
  double rcond = 0.0;
};

/// Solves every grid point; points are independent and shared across
/// `workers` threads.
CGOTraceSet compute_traces(const DeltaDN& delta, const KGrid& grid, int workers = 1,
                           BoundaryOptions options = {});

/// Debug dump: one row per (k, electrode) with all trace values.
void save_traces_csv(const CGOTraceSet& traces, const std::filesystem::path& path);

}  // namespace dbareit
