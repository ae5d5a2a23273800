#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "dbareit/common.hpp"

namespace dbareit {

/// Columns are the trigonometric current patterns scaled to unit l2-norm.
Eigen::MatrixXd trig_basis(int electrode_count);

/// Discrete Dirichlet-to-Neumann map in a basis of unit-norm current patterns.
///
/// Entries act on basis coefficients of point samples at the electrode
/// centers and return basis coefficients of the current density, so that
/// for a homogeneous unit disk the eigenvalue for order n is close to |n|.
struct DNMatrix {
  Eigen::MatrixXcd entries;    // (L-1) x (L-1)
  Eigen::MatrixXd basis;       // L x (L-1)
  std::vector<double> electrode_angles;
  double radius = 1.0;         // physical radius the data was measured on
  bool radius_scaled = false;
  Complex background{1.0, 0.0};
  bool background_scaled = false;

  int electrode_count() const { return static_cast<int>(basis.rows()); }
};

/// Builds the DN matrix from applied currents (L x P, amperes) and the
/// measured electrode voltages (L x P). Currents are normalized to unit
/// l2-norm and voltages by the same factor; the current on an electrode is
/// converted to a density by the electrode pitch 2 pi r / L.
DNMatrix build_dn(const Eigen::MatrixXd& currents, const Eigen::MatrixXcd& voltages,
                  double radius);

/// Lambda_{gamma,1} = r Lambda_{gamma,r}.
DNMatrix scale_to_unit_disk(const DNMatrix& m, double radius);

/// Lambda_{gamma/gamma0} = Lambda_gamma / gamma0, since a constant gamma0 has
/// Lambda_gamma0 = gamma0 Lambda_1.
DNMatrix scale_background(const DNMatrix& m, Complex gamma0);

/// (Lambda_gamma - Lambda_1) as an L x L operator on electrode point samples:
/// analysis in the basis, the matrix difference, synthesis at the centers.
class DeltaDN {
 public:
  DeltaDN(const DNMatrix& gamma, const DNMatrix& one);

  Eigen::VectorXcd apply(const Eigen::VectorXcd& samples) const {
    return point_operator_ * samples;
  }
  const Eigen::MatrixXcd& point_operator() const { return point_operator_; }
  const std::vector<double>& electrode_angles() const { return angles_; }
  int electrode_count() const { return static_cast<int>(angles_.size()); }

 private:
  Eigen::MatrixXcd point_operator_;
  std::vector<double> angles_;
};

Eigen::VectorXcd apply_delta_dn(const DNMatrix& gamma, const DNMatrix& one,
                                const Eigen::VectorXcd& samples);

/// CSV: '#' header with L, radius, flags, background and normalization, then
/// L-1 rows of real parts followed by L-1 rows of imaginary parts.
void save_dn_csv(const DNMatrix& m, const std::filesystem::path& path);
DNMatrix load_dn_csv(const std::filesystem::path& path);

}  // namespace dbareit
