#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cpmol/errors.hpp"

namespace cpmol {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Closest point on triangle (a, b, c) to p, by Voronoi-region
/// classification (vertex, edge or face region).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

struct MeshHit {
  Vec3 point;
  double dist2 = std::numeric_limits<double>::infinity();
  int face = -1;
};

/// Watertight triangle mesh with an axis-aligned bounding-box tree for
/// nearest-point queries. Immutable after construction.
class TriangleMesh {
 public:
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
      : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    validate();
    build_tree();
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }

  Eigen::AlignedBox3d bounds() const { return nodes_.front().box; }

  /// Nearest surface point. Ties in squared distance go to the lowest
  /// face index, so the result matches brute_force_closest exactly.
  MeshHit closest(const Vec3& p) const {
    MeshHit best;
    std::vector<int> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      if (box_dist2(node.box, p) > best.dist2) continue;
      if (node.leaf()) {
        for (int k = node.begin; k < node.end; ++k) consider(order_[k], p, best);
        continue;
      }
      const Node& l = nodes_[node.left];
      const Node& r = nodes_[node.right];
      const double dl = box_dist2(l.box, p);
      const double dr = box_dist2(r.box, p);
      // push the farther child first so the nearer is visited next
      if (dl <= dr) {
        stack.push_back(node.right);
        stack.push_back(node.left);
      } else {
        stack.push_back(node.left);
        stack.push_back(node.right);
      }
    }
    return best;
  }

  MeshHit brute_force_closest(const Vec3& p) const {
    MeshHit best;
    for (int f = 0; f < static_cast<int>(faces_.size()); ++f) consider(f, p, best);
    return best;
  }

  double area() const {
    double total = 0.0;
    for (const Face& f : faces_) total += triangle_area(f);
    return total;
  }

  double mean_edge_length() const {
    double sum = 0.0;
    for (const Face& f : faces_) {
      for (int e = 0; e < 3; ++e) sum += (vertices_[f[e]] - vertices_[f[(e + 1) % 3]]).norm();
    }
    return sum / (3.0 * static_cast<double>(faces_.size()));
  }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
    bool leaf() const { return left < 0; }
  };

  static constexpr int kLeafSize = 4;

  double triangle_area(const Face& f) const {
    return 0.5 * (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]).norm();
  }

  void validate() const {
    if (vertices_.empty() || faces_.empty()) throw EmptyMesh("mesh has no vertices or no faces");
    const int nv = static_cast<int>(vertices_.size());
    std::map<std::pair<int, int>, int> edge_count;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const Face& face = faces_[f];
      for (int idx : face) {
        if (idx < 0 || idx >= nv) {
          throw MeshFormatError("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                                " outside [0, " + std::to_string(nv) + ")");
        }
      }
      if (!(triangle_area(face) > 0.0)) {
        throw DegenerateTriangle("face " + std::to_string(f) + " has zero area");
      }
      for (int e = 0; e < 3; ++e) {
        const int a = face[e];
        const int b = face[(e + 1) % 3];
        ++edge_count[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (const auto& [edge, count] : edge_count) {
      if (count != 2) {
        throw NotWatertight("edge (" + std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                            ") is shared by " + std::to_string(count) + " faces");
      }
    }
  }

  void build_tree() {
    const int nf = static_cast<int>(faces_.size());
    order_.resize(nf);
    centroids_.resize(nf);
    for (int f = 0; f < nf; ++f) {
      order_[f] = f;
      centroids_[f] = (vertices_[faces_[f][0]] + vertices_[faces_[f][1]] + vertices_[faces_[f][2]]) / 3.0;
    }
    nodes_.reserve(2 * nf / kLeafSize + 2);
    build_node(0, nf);
  }

  int build_node(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Eigen::AlignedBox3d box;
    Eigen::AlignedBox3d centroid_box;
    for (int k = begin; k < end; ++k) {
      const Face& f = faces_[order_[k]];
      for (int v : f) box.extend(vertices_[v]);
      centroid_box.extend(centroids_[order_[k]]);
    }
    nodes_[id].box = box;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    centroid_box.sizes().maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
      if (centroids_[a][axis] != centroids_[b][axis]) return centroids_[a][axis] < centroids_[b][axis];
      return a < b;
    });
    const int left = build_node(begin, mid);
    const int right = build_node(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  static double box_dist2(const Eigen::AlignedBox3d& box, const Vec3& p) {
    return box.squaredExteriorDistance(p);
  }

  void consider(int f, const Vec3& p, MeshHit& best) const {
    const Face& face = faces_[f];
    const Vec3 q = closest_point_on_triangle(p, vertices_[face[0]], vertices_[face[1]], vertices_[face[2]]);
    const double d2 = (p - q).squaredNorm();
    if (d2 < best.dist2 || (d2 == best.dist2 && f < best.face)) {
      best.point = q;
      best.dist2 = d2;
      best.face = f;
    }
  }

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<int> order_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

namespace detail {

inline std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
  }
  return {};
}

}  // namespace detail

/// ASCII OFF reader. Faces must be triangles with zero-based indices.
inline TriangleMesh read_off(std::istream& in) {
  std::string header = detail::next_content_line(in);
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "OFF") throw MeshFormatError("missing OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(hs >> nv)) {
    std::istringstream counts(detail::next_content_line(in));
    counts >> nv >> nf >> ne;
  } else {
    hs >> nf >> ne;
  }
  if (nv < 0 || nf < 0) throw MeshFormatError("bad OFF element counts");

  std::vector<Vec3> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    std::istringstream ls(detail::next_content_line(in));
    Vec3 v;
    if (!(ls >> v[0] >> v[1] >> v[2])) throw MeshFormatError("bad OFF vertex line " + std::to_string(i));
    vertices.push_back(v);
  }
  std::vector<Face> faces;
  faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    std::istringstream ls(detail::next_content_line(in));
    int count = 0;
    if (!(ls >> count)) throw MeshFormatError("bad OFF face line " + std::to_string(i));
    if (count != 3) throw MeshFormatError("OFF face " + std::to_string(i) + " is not a triangle");
    Face f{};
    if (!(ls >> f[0] >> f[1] >> f[2])) throw MeshFormatError("bad OFF face line " + std::to_string(i));
    faces.push_back(f);
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

/// ASCII OBJ reader (v and f records only; f indices are one-based and
/// may carry /vt/vn suffixes, which are ignored).
inline TriangleMesh read_obj(std::istream& in) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v[0] >> v[1] >> v[2])) throw MeshFormatError("bad OBJ vertex: " + line);
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const int i = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(i > 0 ? i - 1 : static_cast<int>(vertices.size()) + i);
      }
      if (idx.size() != 3) throw MeshFormatError("OBJ face is not a triangle: " + line);
      faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

inline TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshFormatError("cannot open mesh file " + path);
  const auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == "off") return read_off(in);
  if (ext == "obj") return read_obj(in);
  throw MeshFormatError("unknown mesh extension '" + ext + "' (expected .off or .obj)");
}

inline void write_off(std::ostream& out, const TriangleMesh& mesh) {
  out.precision(17);
  out << "OFF\n" << mesh.vertices().size() << ' ' << mesh.faces().size() << " 0\n";
  for (const Vec3& v : mesh.vertices()) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

// Mesh generators used for tests and the bundled data files.

inline TriangleMesh make_octahedron(double radius = 1.0) {
  std::vector<Vec3> v = {{radius, 0, 0}, {-radius, 0, 0}, {0, radius, 0},
                         {0, -radius, 0}, {0, 0, radius}, {0, 0, -radius}};
  std::vector<Face> f = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                         {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return TriangleMesh(std::move(v), std::move(f));
}

/// Unit cube [-0.5, 0.5]^3, two triangles per side.
inline TriangleMesh make_cube() {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) v.emplace_back((i & 1) - 0.5, ((i >> 1) & 1) - 0.5, ((i >> 2) & 1) - 0.5);
  std::vector<Face> f = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                         {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return TriangleMesh(std::move(v), std::move(f));
}

/// Icosphere: subdivided icosahedron projected to the sphere.
inline TriangleMesh make_icosphere(int subdivisions, double radius = 1.0) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7}, {9, 8, 1}};
  for (Vec3& p : v) p.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriangleMesh(std::move(v), std::move(f));
}

/// Torus around the z axis with tube radius r and centre-line radius R.
inline TriangleMesh make_torus(double major_radius, double minor_radius, int n_major, int n_minor) {
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>(n_major) * n_minor);
  for (int i = 0; i < n_major; ++i) {
    const double u = 2.0 * std::numbers::pi * i / n_major;
    for (int j = 0; j < n_minor; ++j) {
      const double w = 2.0 * std::numbers::pi * j / n_minor;
      const double rho = major_radius + minor_radius * std::cos(w);
      v.emplace_back(rho * std::cos(u), rho * std::sin(u), minor_radius * std::sin(w));
    }
  }
  auto id = [&](int i, int j) { return ((i + n_major) % n_major) * n_minor + (j + n_minor) % n_minor; };
  std::vector<Face> f;
  f.reserve(2 * v.size());
  for (int i = 0; i < n_major; ++i) {
    for (int j = 0; j < n_minor; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriangleMesh(std::move(v), std::move(f));
}

}  // namespace cpmol
