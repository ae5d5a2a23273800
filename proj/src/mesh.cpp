#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "dbareit/forward_fem.hpp"

namespace dbareit {
namespace {

struct Ring {
  std::vector<int> nodes;
  std::vector<double> angles;  // ascending in [0, 2 pi)
};

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

double signed_area(Complex a, Complex b, Complex c) {
  return 0.5 * ((b.real() - a.real()) * (c.imag() - a.imag()) -
                (c.real() - a.real()) * (b.imag() - a.imag()));
}

void push_ccw(DiskMesh& mesh, int a, int b, int c) {
  const auto& v = mesh.vertices;
  if (signed_area(v[a], v[b], v[c]) < 0.0) std::swap(b, c);
  mesh.triangles.push_back({a, b, c});
}

// Stitches two concentric rings by walking both in angle order; produces
// |inner| + |outer| triangles.
void zip_rings(DiskMesh& mesh, const Ring& inner, const Ring& outer) {
  const int p = static_cast<int>(inner.nodes.size());
  const int q = static_cast<int>(outer.nodes.size());
  const double a0 = inner.angles[0];

  int j0 = 0;
  double best = 1e300;
  for (int j = 0; j < q; ++j) {
    double d = std::abs(wrap_angle(outer.angles[j] - a0 + kPi) - kPi);
    if (d < best) {
      best = d;
      j0 = j;
    }
  }
  const double b0 = a0 + (wrap_angle(outer.angles[j0] - a0 + kPi) - kPi);

  auto a_at = [&](int t) {
    if (t == p) return a0 + 2.0 * kPi;
    return a0 + wrap_angle(inner.angles[t] - a0);
  };
  auto b_at = [&](int t) {
    if (t == q) return b0 + 2.0 * kPi;
    return b0 + wrap_angle(outer.angles[(j0 + t) % q] - outer.angles[j0]);
  };
  auto a_node = [&](int t) { return inner.nodes[t % p]; };
  auto b_node = [&](int t) { return outer.nodes[(j0 + t) % q]; };

  int i = 0;
  int j = 0;
  while (i < p || j < q) {
    const bool advance_inner = (j == q) || (i < p && a_at(i + 1) <= b_at(j + 1));
    if (advance_inner) {
      push_ccw(mesh, a_node(i), a_node(i + 1), b_node(j));
      ++i;
    } else {
      push_ccw(mesh, a_node(i), b_node(j + 1), b_node(j));
      ++j;
    }
  }
}

}  // namespace

void ElectrodeLayout::validate(double radius) const {
  if (count < 2 || count % 2 != 0) throw Error("electrode count must be even");
  if (!(width > 0.0)) throw Error("electrode width must be positive");
  if (!(radius > 0.0)) throw Error("disk radius must be positive");
  if (count * width >= 2.0 * kPi * radius) {
    throw Error("electrodes overlap: L * width exceeds the circumference");
  }
  if (std::abs(contact_impedance) == 0.0) {
    throw Error("contact impedance must be nonzero");
  }
}

double DiskMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

Complex DiskMesh::centroid(std::size_t t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

DiskMesh build_disk_mesh(double radius, int target_triangles,
                         const ElectrodeLayout& layout) {
  layout.validate(radius);
  if (target_triangles < 500) throw Error("target_triangles must be at least 500");

  const int L = layout.count;
  const double half = layout.width / (2.0 * radius);
  const double pitch = 2.0 * kPi / L;
  const double gap = pitch - 2.0 * half;

  // Boundary spacing close to the radial spacing: T ~ N_b m and N_b ~ 2 pi m.
  const double boundary_target = std::sqrt(2.0 * kPi * target_triangles);
  const double step = pitch / std::max(boundary_target / L, 2.0);
  const int per_electrode = std::max(2, static_cast<int>(std::lround(2.0 * half / step)));
  const int per_gap = std::max(1, static_cast<int>(std::lround(gap / step)));

  Ring boundary;
  for (int e = 0; e < L; ++e) {
    const double start = layout.center_angle(e) - half;
    for (int s = 0; s < per_electrode; ++s) {
      boundary.angles.push_back(start + 2.0 * half * s / per_electrode);
    }
    for (int g = 0; g < per_gap; ++g) {
      boundary.angles.push_back(start + 2.0 * half + gap * g / per_gap);
    }
  }
  const int nb = static_cast<int>(boundary.angles.size());
  const int rings = std::max(2, static_cast<int>(std::lround(
                                    static_cast<double>(target_triangles) / nb)));

  DiskMesh mesh;
  mesh.radius = radius;
  mesh.vertices.push_back({0.0, 0.0});

  Ring previous;
  previous.nodes = {0};
  previous.angles = {0.0};
  for (int i = 1; i <= rings; ++i) {
    Ring ring;
    const double r = radius * i / rings;
    if (i < rings) {
      const int count = std::max(6, static_cast<int>(std::lround(
                                        static_cast<double>(nb) * i / rings)));
      const double offset = (i % 2 == 1) ? kPi / count : 0.0;
      for (int t = 0; t < count; ++t) {
        ring.angles.push_back(wrap_angle(offset + 2.0 * kPi * t / count));
      }
    } else {
      ring.angles = boundary.angles;
    }
    // Sort by wrapped angle while remembering the original order.
    std::vector<int> order(ring.angles.size());
    for (std::size_t t = 0; t < order.size(); ++t) order[t] = static_cast<int>(t);
    for (auto& a : ring.angles) a = wrap_angle(a);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ring.angles[a] < ring.angles[b]; });
    std::vector<double> sorted;
    std::vector<int> first_node(order.size());
    for (std::size_t t = 0; t < order.size(); ++t) {
      sorted.push_back(ring.angles[order[t]]);
    }
    const int base = static_cast<int>(mesh.vertices.size());
    for (std::size_t t = 0; t < sorted.size(); ++t) {
      mesh.vertices.push_back(std::polar(r, sorted[t]));
      ring.nodes.push_back(base + static_cast<int>(t));
    }
    if (i == rings) {
      // Map boundary generation order to vertex ids for the electrode map.
      for (std::size_t t = 0; t < order.size(); ++t) {
        first_node[order[t]] = ring.nodes[t];
      }
      boundary.nodes = first_node;
    }
    ring.angles = std::move(sorted);

    if (i == 1) {
      const int q = static_cast<int>(ring.nodes.size());
      for (int t = 0; t < q; ++t) {
        push_ccw(mesh, 0, ring.nodes[t], ring.nodes[(t + 1) % q]);
      }
    } else {
      zip_rings(mesh, previous, ring);
    }
    previous = std::move(ring);
  }

  // Boundary chain in generation order (counter-clockwise from electrode 0).
  const int period = per_electrode + per_gap;
  mesh.electrode_edges.assign(L, {});
  for (int t = 0; t < nb; ++t) {
    mesh.boundary_edges.push_back({boundary.nodes[t], boundary.nodes[(t + 1) % nb]});
    const int e = t / period;
    if (t % period < per_electrode) {
      mesh.electrode_edges[e].push_back(t);
    }
  }

  const double ratio = static_cast<double>(mesh.triangles.size()) / target_triangles;
  if (ratio < 0.75 || ratio > 1.25) {
    throw Error("mesh generator missed the triangle target (" +
                std::to_string(mesh.triangles.size()) + " for " +
                std::to_string(target_triangles) + ")");
  }
  return mesh;
}

void save_mesh(const DiskMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file " + path.string());
  out << std::setprecision(17);
  out << "# dbareit disk mesh v1\n";
  out << "radius " << mesh.radius << "\n";
  out << "vertices " << mesh.vertices.size() << "\n";
  for (const auto& v : mesh.vertices) out << v.real() << ' ' << v.imag() << "\n";
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  out << "boundary_edges " << mesh.boundary_edges.size() << "\n";
  for (const auto& e : mesh.boundary_edges) out << e[0] << ' ' << e[1] << "\n";
  out << "electrodes " << mesh.electrode_edges.size() << "\n";
  for (const auto& edges : mesh.electrode_edges) {
    out << edges.size();
    for (int e : edges) out << ' ' << e;
    out << "\n";
  }
}

DiskMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read mesh file " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("# dbareit disk mesh", 0) != 0) throw Error("not a mesh file");

  auto expect = [&](const char* key) {
    std::string word;
    std::size_t n = 0;
    if (!(in >> word >> n) || word != key) {
      throw Error(std::string("mesh file: expected section '") + key + "'");
    }
    return n;
  };

  DiskMesh mesh;
  std::string word;
  if (!(in >> word >> mesh.radius) || word != "radius") throw Error("mesh file: missing radius");
  mesh.vertices.resize(expect("vertices"));
  for (auto& v : mesh.vertices) {
    double x = 0.0;
    double y = 0.0;
    in >> x >> y;
    v = {x, y};
  }
  mesh.triangles.resize(expect("triangles"));
  for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
  mesh.boundary_edges.resize(expect("boundary_edges"));
  for (auto& e : mesh.boundary_edges) in >> e[0] >> e[1];
  mesh.electrode_edges.resize(expect("electrodes"));
  for (auto& edges : mesh.electrode_edges) {
    std::size_t n = 0;
    in >> n;
    edges.resize(n);
    for (auto& e : edges) in >> e;
  }
  if (!in) throw Error("mesh file truncated");
  return mesh;
}

}  // namespace dbareit
