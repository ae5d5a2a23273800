#include "dbareit/forward_fem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace dbareit {

std::vector<CurrentPattern> trig_patterns(int L, double amplitude) {
  if (L < 2 || L % 2 != 0) throw Error("trig patterns need an even electrode count");
  std::vector<CurrentPattern> patterns;
  patterns.reserve(L - 1);
  for (int j = 1; j <= L - 1; ++j) {
    CurrentPattern p;
    p.index = j;
    p.values.resize(L);
    for (int l = 0; l < L; ++l) {
      const double theta = 2.0 * kPi * l / L;
      p.values[l] = (j <= L / 2) ? amplitude * std::cos(j * theta)
                                 : amplitude * std::sin((L / 2 - j) * theta);
    }
    patterns.push_back(std::move(p));
  }
  return patterns;
}

Eigen::MatrixXd pattern_matrix(const std::vector<CurrentPattern>& patterns) {
  if (patterns.empty()) return {};
  Eigen::MatrixXd m(patterns.front().values.size(), patterns.size());
  for (std::size_t j = 0; j < patterns.size(); ++j) m.col(j) = patterns[j].values;
  return m;
}

struct CemSolver::Impl {
  Eigen::SparseMatrix<Complex> matrix;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>> lu;
};

CemSolver::CemSolver(const DiskMesh& mesh, const AdmittivityField& field,
                     const ElectrodeLayout& layout)
    : impl_(std::make_unique<Impl>()),
      electrode_count_(layout.count),
      vertex_count_(mesh.vertex_count()) {
  layout.validate(mesh.radius);
  if (static_cast<int>(mesh.electrode_edges.size()) != layout.count) {
    throw Error("mesh electrode map does not match the electrode layout");
  }
  const int n = static_cast<int>(mesh.vertex_count());
  const int L = layout.count;
  const int dim = n + L + 1;
  const Complex inv_z = 1.0 / layout.contact_impedance;

  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(mesh.triangle_count() * 9 + mesh.boundary_edges.size() * 8 + 4 * L);

  element_gamma_.resize(mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Complex gamma = field.sample(mesh.centroid(t));
    element_gamma_[t] = gamma;
    const double area = mesh.triangle_area(t);
    if (!(area > 0.0)) throw Error("mesh contains a degenerate or inverted triangle");
    double b[3];
    double c[3];
    for (int i = 0; i < 3; ++i) {
      const Complex pj = mesh.vertices[tri[(i + 1) % 3]];
      const Complex pk = mesh.vertices[tri[(i + 2) % 3]];
      b[i] = pj.imag() - pk.imag();
      c[i] = pk.real() - pj.real();
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        entries.emplace_back(tri[i], tri[j],
                             gamma * ((b[i] * b[j] + c[i] * c[j]) / (4.0 * area)));
      }
    }
  }

  for (int l = 0; l < L; ++l) {
    const int row = n + l;
    for (int edge : mesh.electrode_edges[l]) {
      const auto [a, bnode] = mesh.boundary_edges[edge];
      const double len = std::abs(mesh.vertices[bnode] - mesh.vertices[a]);
      entries.emplace_back(a, a, inv_z * (len / 3.0));
      entries.emplace_back(bnode, bnode, inv_z * (len / 3.0));
      entries.emplace_back(a, bnode, inv_z * (len / 6.0));
      entries.emplace_back(bnode, a, inv_z * (len / 6.0));
      entries.emplace_back(a, row, -inv_z * (len / 2.0));
      entries.emplace_back(row, a, -inv_z * (len / 2.0));
      entries.emplace_back(bnode, row, -inv_z * (len / 2.0));
      entries.emplace_back(row, bnode, -inv_z * (len / 2.0));
      entries.emplace_back(row, row, inv_z * len);
    }
    entries.emplace_back(row, dim - 1, Complex(1.0));
    entries.emplace_back(dim - 1, row, Complex(1.0));
  }

  impl_->matrix.resize(dim, dim);
  impl_->matrix.setFromTriplets(entries.begin(), entries.end());
  impl_->matrix.makeCompressed();
  impl_->lu.analyzePattern(impl_->matrix);
  impl_->lu.factorize(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) {
    throw Error("CEM system is singular: " + impl_->lu.lastErrorMessage());
  }
}

CemSolver::~CemSolver() = default;
CemSolver::CemSolver(CemSolver&&) noexcept = default;
CemSolver& CemSolver::operator=(CemSolver&&) noexcept = default;

namespace {

void check_pattern(const Eigen::VectorXd& currents, int L) {
  if (currents.size() != L) throw Error("current pattern has the wrong length");
  const double norm = currents.norm();
  if (norm == 0.0) throw Error("singular CEM solve: all-zero current pattern");
  if (std::abs(currents.sum()) > 1e-12 * norm) {
    throw Error("current pattern violates charge conservation");
  }
}

}  // namespace

CemSolution CemSolver::solve(const Eigen::VectorXd& currents) const {
  check_pattern(currents, electrode_count_);
  const int n = static_cast<int>(vertex_count_);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + electrode_count_ + 1);
  rhs.segment(n, electrode_count_) = currents.cast<Complex>();
  const Eigen::VectorXcd x = impl_->lu.solve(rhs);
  return {x.head(n), x.segment(n, electrode_count_)};
}

Eigen::MatrixXcd CemSolver::electrode_voltages(const Eigen::MatrixXd& currents) const {
  const int n = static_cast<int>(vertex_count_);
  for (Eigen::Index j = 0; j < currents.cols(); ++j) {
    check_pattern(currents.col(j), electrode_count_);
  }
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n + electrode_count_ + 1, currents.cols());
  rhs.middleRows(n, electrode_count_) = currents.cast<Complex>();
  const Eigen::MatrixXcd x = impl_->lu.solve(rhs);
  return x.middleRows(n, electrode_count_);
}

double CemSolver::relative_residual(const Eigen::VectorXd& currents,
                                    const CemSolution& solution) const {
  const int n = static_cast<int>(vertex_count_);
  const int dim = n + electrode_count_ + 1;
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
  x.head(n) = solution.potential;
  x.segment(n, electrode_count_) = solution.voltages;
  // The ground multiplier is zero at the exact solution since sum I = 0.
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
  rhs.segment(n, electrode_count_) = currents.cast<Complex>();
  return (impl_->matrix * x - rhs).norm() / rhs.norm();
}

CemSolution solve_cem(const DiskMesh& mesh, const AdmittivityField& field,
                      const ElectrodeLayout& layout, const CurrentPattern& pattern) {
  return CemSolver(mesh, field, layout).solve(pattern.values);
}

namespace {

// Box-Muller on a fully specified engine so that noise is reproducible
// across standard library implementations.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

Eigen::MatrixXcd add_noise(const Eigen::MatrixXcd& voltages, double eta,
                           std::uint64_t seed) {
  if (eta < 0.0) throw Error("noise level must be nonnegative");
  Eigen::MatrixXcd out = voltages;
  if (eta == 0.0) return out;
  GaussianStream gauss(seed);
  for (Eigen::Index j = 0; j < voltages.cols(); ++j) {
    const double re_scale = eta * voltages.col(j).real().cwiseAbs().maxCoeff();
    const double im_scale = eta * voltages.col(j).imag().cwiseAbs().maxCoeff();
    for (Eigen::Index l = 0; l < voltages.rows(); ++l) {
      out(l, j) += re_scale * gauss.next();
    }
    for (Eigen::Index l = 0; l < voltages.rows(); ++l) {
      out(l, j) += Complex(0.0, im_scale * gauss.next());
    }
  }
  return out;
}

void save_voltages_csv(const Eigen::MatrixXcd& voltages,
                       const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot write " + path.string());
  std::fprintf(f, "# patterns=%ld electrodes=%ld columns=re,im per electrode\n",
               static_cast<long>(voltages.cols()), static_cast<long>(voltages.rows()));
  for (Eigen::Index j = 0; j < voltages.cols(); ++j) {
    for (Eigen::Index l = 0; l < voltages.rows(); ++l) {
      std::fprintf(f, "%s%.17g,%.17g", l == 0 ? "" : ",", voltages(l, j).real(),
                   voltages(l, j).imag());
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

Eigen::MatrixXcd load_voltages_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() % 2 != 0) throw Error("malformed voltage CSV");
  const auto L = static_cast<Eigen::Index>(rows.front().size() / 2);
  Eigen::MatrixXcd v(L, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != rows.front().size()) throw Error("ragged voltage CSV");
    for (Eigen::Index l = 0; l < L; ++l) v(l, j) = {rows[j][2 * l], rows[j][2 * l + 1]};
  }
  return v;
}

}  // namespace dbareit
