#include "dbareit/dn_map.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace dbareit {
namespace {

std::vector<double> center_angles(int L) {
  std::vector<double> a(L);
  for (int l = 0; l < L; ++l) a[l] = 2.0 * kPi * l / L;
  return a;
}

bool same_basis(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a - b).cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace

Eigen::MatrixXd trig_basis(int L) {
  if (L < 2 || L % 2 != 0) throw Error("trig basis needs an even electrode count");
  Eigen::MatrixXd basis(L, L - 1);
  for (int j = 1; j <= L - 1; ++j) {
    for (int l = 0; l < L; ++l) {
      const double theta = 2.0 * kPi * l / L;
      basis(l, j - 1) = (j <= L / 2) ? std::cos(j * theta) : std::sin((L / 2 - j) * theta);
    }
    basis.col(j - 1).normalize();
  }
  return basis;
}

DNMatrix build_dn(const Eigen::MatrixXd& currents, const Eigen::MatrixXcd& voltages,
                  double radius) {
  const auto L = currents.rows();
  if (voltages.rows() != L || voltages.cols() != currents.cols()) {
    throw Error("current and voltage matrices do not match");
  }
  if (currents.cols() != L - 1) throw Error("expected L-1 current patterns");
  if (!(radius > 0.0)) throw Error("radius must be positive");

  DNMatrix m;
  m.radius = radius;
  m.electrode_angles = center_angles(static_cast<int>(L));
  m.basis = currents;
  Eigen::MatrixXcd scaled = voltages;
  for (Eigen::Index j = 0; j < currents.cols(); ++j) {
    const double norm = currents.col(j).norm();
    if (norm == 0.0) throw Error("zero current pattern");
    m.basis.col(j) /= norm;
    scaled.col(j) /= norm;
  }
  // Coordinates of the voltages in the (possibly non-orthogonal) pattern basis.
  const Eigen::MatrixXd gram = m.basis.transpose() * m.basis;
  Eigen::PartialPivLU<Eigen::MatrixXd> gram_lu(gram);
  if (gram_lu.rcond() < 1e-12) throw Error("current patterns are linearly dependent");
  const Eigen::MatrixXcd nd =
      gram_lu.solve(m.basis.transpose()).cast<Complex>() * scaled;

  const double pitch = 2.0 * kPi * radius / static_cast<double>(L);
  Eigen::PartialPivLU<Eigen::MatrixXcd> nd_lu(pitch * nd);
  if (!(nd_lu.rcond() > 1e-14)) throw Error("ND matrix is singular");
  m.entries = nd_lu.inverse();
  return m;
}

DNMatrix scale_to_unit_disk(const DNMatrix& m, double radius) {
  if (m.radius_scaled) throw Error("DN matrix is already scaled to the unit disk");
  if (!(radius > 0.0)) throw Error("radius must be positive");
  DNMatrix out = m;
  out.entries *= radius;
  out.radius_scaled = true;
  return out;
}

DNMatrix scale_background(const DNMatrix& m, Complex gamma0) {
  if (!(gamma0.real() > 0.0)) {
    throw Error("background admittivity must have positive real part");
  }
  if (m.background_scaled) throw Error("DN matrix is already background-scaled");
  DNMatrix out = m;
  out.entries /= gamma0;
  out.background = gamma0;
  out.background_scaled = true;
  return out;
}

DeltaDN::DeltaDN(const DNMatrix& gamma, const DNMatrix& one) {
  if (gamma.radius_scaled != one.radius_scaled) {
    throw Error("DN matrices have mismatched radius scaling");
  }
  if (!same_basis(gamma.basis, one.basis)) {
    throw Error("DN matrices use different bases");
  }
  const Eigen::MatrixXd& phi = gamma.basis;
  const Eigen::MatrixXd analysis =
      (phi.transpose() * phi).partialPivLu().solve(phi.transpose());
  point_operator_ = phi.cast<Complex>() * (gamma.entries - one.entries) *
                    analysis.cast<Complex>();
  angles_ = gamma.electrode_angles;
}

Eigen::VectorXcd apply_delta_dn(const DNMatrix& gamma, const DNMatrix& one,
                                const Eigen::VectorXcd& samples) {
  DeltaDN delta(gamma, one);
  if (samples.size() != delta.electrode_count()) {
    throw Error("sample vector length does not match the electrode count");
  }
  return delta.apply(samples);
}

void save_dn_csv(const DNMatrix& m, const std::filesystem::path& path) {
  const int L = m.electrode_count();
  if (!same_basis(m.basis, trig_basis(L))) {
    throw Error("only DN matrices in the trig basis can be serialized");
  }
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot write " + path.string());
  std::fprintf(f, "# dbareit DN matrix v1\n");
  std::fprintf(f,
               "# L=%d radius=%.17g radius_scaled=%d background=%.17g,%.17g "
               "background_scaled=%d normalization=unit-l2-trig\n",
               L, m.radius, m.radius_scaled ? 1 : 0, m.background.real(),
               m.background.imag(), m.background_scaled ? 1 : 0);
  for (int part = 0; part < 2; ++part) {
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.entries.cols(); ++j) {
        const Complex v = m.entries(i, j);
        std::fprintf(f, "%s%.17g", j == 0 ? "" : ",", part == 0 ? v.real() : v.imag());
      }
      std::fprintf(f, "\n");
    }
  }
  std::fclose(f);
}

DNMatrix load_dn_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::map<std::string, std::string> header;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string token;
      while (is >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) header[token.substr(0, eq)] = token.substr(eq + 1);
      }
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (!header.count("L")) throw Error("DN CSV: header lacks L");
  const int L = std::stoi(header["L"]);
  const auto n = static_cast<std::size_t>(L - 1);
  if (rows.size() != 2 * n) throw Error("DN CSV: expected 2(L-1) rows");

  DNMatrix m;
  m.basis = trig_basis(L);
  m.electrode_angles = center_angles(L);
  m.radius = std::stod(header["radius"]);
  m.radius_scaled = header["radius_scaled"] == "1";
  m.background_scaled = header["background_scaled"] == "1";
  const auto comma = header["background"].find(',');
  m.background = {std::stod(header["background"].substr(0, comma)),
                  std::stod(header["background"].substr(comma + 1))};
  m.entries.resize(L - 1, L - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n || rows[n + i].size() != n) throw Error("DN CSV: ragged rows");
    for (std::size_t j = 0; j < n; ++j) m.entries(i, j) = {rows[i][j], rows[n + i][j]};
  }
  return m;
}

}  // namespace dbareit
