#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dbareit/common.hpp"
#include "dbareit/phantom.hpp"

namespace dbareit {

/// L equispaced electrodes with centers at theta_l = 2 pi l / L, l = 0..L-1.
struct ElectrodeLayout {
  int count = 32;
  double width = 0.029;               // arc length, meters
  Complex contact_impedance{0.0057};  // Ohm m^2

  double center_angle(int l) const { return 2.0 * kPi * l / count; }
  void validate(double radius) const;
};

/// Triangulated disk with electrode arcs on the boundary.
struct DiskMesh {
  double radius = 0.0;
  std::vector<Complex> vertices;
  std::vector<std::array<int, 3>> triangles;        // counter-clockwise
  std::vector<std::array<int, 2>> boundary_edges;   // counter-clockwise chain
  std::vector<std::vector<int>> electrode_edges;    // indices into boundary_edges

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  double triangle_area(std::size_t t) const;
  Complex centroid(std::size_t t) const;
};

/// Ring-structured mesh. Boundary vertices include every electrode endpoint;
/// the triangle count lands within 25% of `target_triangles`.
DiskMesh build_disk_mesh(double radius, int target_triangles,
                         const ElectrodeLayout& layout);

void save_mesh(const DiskMesh& mesh, const std::filesystem::path& path);
DiskMesh load_mesh(const std::filesystem::path& path);

/// One applied current pattern (amperes per electrode).
struct CurrentPattern {
  int index = 0;  // 1..L-1
  Eigen::VectorXd values;
};

/// Trigonometric patterns: C cos(j theta_l) for j <= L/2 and
/// C sin((L/2 - j) theta_l) for L/2 < j <= L-1.
std::vector<CurrentPattern> trig_patterns(int electrode_count, double amplitude);

/// Columns of the result are the patterns in order.
Eigen::MatrixXd pattern_matrix(const std::vector<CurrentPattern>& patterns);

struct CemSolution {
  Eigen::VectorXcd potential;   // per mesh vertex
  Eigen::VectorXcd voltages;    // per electrode, sum zero
};

/// Complete electrode model with linear triangles. The system is assembled and
/// factored once per admittivity; each pattern is then a pair of triangular solves.
///
/// Unknowns are [vertex potentials, electrode voltages, ground multiplier]; the
/// last row enforces sum_l V_l = 0. The matrix is complex symmetric.
class CemSolver {
 public:
  CemSolver(const DiskMesh& mesh, const AdmittivityField& field,
            const ElectrodeLayout& layout);
  ~CemSolver();
  CemSolver(CemSolver&&) noexcept;
  CemSolver& operator=(CemSolver&&) noexcept;

  CemSolution solve(const Eigen::VectorXd& currents) const;
  /// Electrode voltages for many patterns at once (one column per pattern).
  Eigen::MatrixXcd electrode_voltages(const Eigen::MatrixXd& currents) const;

  /// ||A x - b|| / ||b|| for a computed solution.
  double relative_residual(const Eigen::VectorXd& currents,
                           const CemSolution& solution) const;

  const std::vector<Complex>& element_admittivity() const { return element_gamma_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<Complex> element_gamma_;
  int electrode_count_ = 0;
  std::size_t vertex_count_ = 0;
};

CemSolution solve_cem(const DiskMesh& mesh, const AdmittivityField& field,
                      const ElectrodeLayout& layout, const CurrentPattern& pattern);

/// Adds seeded Gaussian noise per pattern (column):
///   Re V += eta * max|Re V| * N,  Im V += eta * max|Im V| * N'.
/// N and N' are fresh unit-variance vectors drawn with Box-Muller from a
/// std::mt19937_64 seeded with `seed`; the real block of a column is drawn
/// before its imaginary block, columns in order.
Eigen::MatrixXcd add_noise(const Eigen::MatrixXcd& voltages, double eta,
                           std::uint64_t seed);

/// CSV with one row per pattern: Re V_1, Im V_1, ..., Re V_L, Im V_L.
void save_voltages_csv(const Eigen::MatrixXcd& voltages,
                       const std::filesystem::path& path);
Eigen::MatrixXcd load_voltages_csv(const std::filesystem::path& path);

}  // namespace dbareit
