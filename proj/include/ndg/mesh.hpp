#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ndg {

using Point = Eigen::Vector2d;

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains_strictly(const Point& p) const {
    return p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1;
  }
};

enum class EdgeKind { interior, boundary };

/// Mesh edge. `plus` is the adjacent element with the smaller global index and
/// `normal` is its outward unit normal (the domain's outward normal on the
/// boundary). `minus` is -1 on boundary edges.
struct Edge {
  std::array<int, 2> vertices{};
  double length = 0.0;
  Point normal = Point::Zero();
  int plus = -1;
  int minus = -1;
  EdgeKind kind = EdgeKind::boundary;

  bool is_interior() const { return kind == EdgeKind::interior; }
};

struct Element {
  std::array<int, 3> vertices{};  // counter-clockwise
  std::array<int, 3> edges{};     // edge opposite to local vertex i
};

struct MeshStats {
  double h_max = 0.0;
  double min_angle = 0.0;  // radians
  std::size_t element_count = 0;
};

/// Conforming triangulation of a rectangle. Immutable once built.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<Element> elements,
       std::vector<Edge> edges, Rect domain)
      : vertices_(std::move(vertices)),
        elements_(std::move(elements)),
        edges_(std::move(edges)),
        domain_(domain) {
    for (std::size_t t = 0; t < elements_.size(); ++t) {
      h_max_ = std::max(h_max_, diameter(static_cast<int>(t)));
    }
  }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Rect& domain() const { return domain_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  double h_max() const { return h_max_; }

  const Point& vertex(int i) const { return vertices_.at(static_cast<std::size_t>(i)); }
  const Element& element(int t) const { return elements_.at(static_cast<std::size_t>(t)); }

  const Edge& edge(int e) const {
    if (e < 0 || static_cast<std::size_t>(e) >= edges_.size()) {
      throw std::invalid_argument("edge index " + std::to_string(e) + " out of range");
    }
    return edges_[static_cast<std::size_t>(e)];
  }

  Point centroid(int t) const {
    const auto& v = element(t).vertices;
    return (vertex(v[0]) + vertex(v[1]) + vertex(v[2])) / 3.0;
  }

  double area(int t) const {
    const auto& v = element(t).vertices;
    const Point a = vertex(v[1]) - vertex(v[0]);
    const Point b = vertex(v[2]) - vertex(v[0]);
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }

  double diameter(int t) const {
    const auto& v = element(t).vertices;
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
      d = std::max(d, (vertex(v[i]) - vertex(v[(i + 1) % 3])).norm());
    }
    return d;
  }

 private:
  std::vector<Point> vertices_;
  std::vector<Element> elements_;
  std::vector<Edge> edges_;
  Rect domain_;
  double h_max_ = 0.0;
};

/// Uniform n x n grid of `rect`, every cell split along its bottom-left to
/// top-right diagonal. Element index = 2 * (row-major cell index) + {0 lower,
/// 1 upper}.
inline Mesh build_uniform_mesh(const Rect& rect, int n) {
  if (n < 1) throw std::invalid_argument("build_uniform_mesh: n must be >= 1");
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0) || !std::isfinite(rect.width()) ||
      !std::isfinite(rect.height())) {
    throw std::invalid_argument("build_uniform_mesh: degenerate rectangle");
  }

  const int nv = n + 1;
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(nv * nv));
  for (int j = 0; j <= n; ++j) {
    // Interpolate rather than accumulate so that grid lines land exactly on 0
    // for symmetric domains.
    const double y = j == n ? rect.y1 : rect.y0 + rect.height() * j / n;
    for (int i = 0; i <= n; ++i) {
      const double x = i == n ? rect.x1 : rect.x0 + rect.width() * i / n;
      vertices.emplace_back(x, y);
    }
  }
  auto vid = [nv](int i, int j) { return j * nv + i; };

  std::vector<Element> elements;
  elements.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1),
                v01 = vid(i, j + 1);
      elements.push_back(Element{{v00, v10, v11}, {}});
      elements.push_back(Element{{v00, v11, v01}, {}});
    }
  }

  std::vector<Edge> edges;
  std::map<std::pair<int, int>, int> lookup;
  for (std::size_t t = 0; t < elements.size(); ++t) {
    auto& el = elements[t];
    for (int local = 0; local < 3; ++local) {
      const int a = el.vertices[static_cast<std::size_t>((local + 1) % 3)];
      const int b = el.vertices[static_cast<std::size_t>((local + 2) % 3)];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second},
                                               static_cast<int>(edges.size()));
      if (inserted) {
        Edge e;
        e.vertices = {a, b};
        e.plus = static_cast<int>(t);
        edges.push_back(e);
      } else {
        edges[static_cast<std::size_t>(it->second)].minus = static_cast<int>(t);
      }
      el.edges[static_cast<std::size_t>(local)] = it->second;
    }
  }

  for (auto& e : edges) {
    e.kind = e.minus < 0 ? EdgeKind::boundary : EdgeKind::interior;
    const Point& pa = vertices[static_cast<std::size_t>(e.vertices[0])];
    const Point& pb = vertices[static_cast<std::size_t>(e.vertices[1])];
    const Point tangent = pb - pa;
    e.length = tangent.norm();
    Point normal(tangent.y(), -tangent.x());
    normal /= e.length;
    const auto& pv = elements[static_cast<std::size_t>(e.plus)].vertices;
    const Point c = (vertices[static_cast<std::size_t>(pv[0])] +
                     vertices[static_cast<std::size_t>(pv[1])] +
                     vertices[static_cast<std::size_t>(pv[2])]) / 3.0;
    if (normal.dot(0.5 * (pa + pb) - c) < 0.0) normal = -normal;
    e.normal = normal;
  }

  return Mesh(std::move(vertices), std::move(elements), std::move(edges), rect);
}

struct EdgeGeometry {
  double length = 0.0;
  Point normal = Point::Zero();
  int plus = -1;
  int minus = -1;
  EdgeKind kind = EdgeKind::boundary;
};

inline EdgeGeometry edge_geometry(const Mesh& mesh, int edge_id) {
  const Edge& e = mesh.edge(edge_id);
  return {e.length, e.normal, e.plus, e.minus, e.kind};
}

inline MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats s;
  s.h_max = mesh.h_max();
  s.element_count = mesh.num_elements();
  s.min_angle = std::numbers::pi;
  for (const auto& el : mesh.elements()) {
    for (int i = 0; i < 3; ++i) {
      const Point& p = mesh.vertex(el.vertices[static_cast<std::size_t>(i)]);
      const Point a = mesh.vertex(el.vertices[static_cast<std::size_t>((i + 1) % 3)]) - p;
      const Point b = mesh.vertex(el.vertices[static_cast<std::size_t>((i + 2) % 3)]) - p;
      const double cosine = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
      s.min_angle = std::min(s.min_angle, std::acos(cosine));
    }
  }
  return s;
}

/// Circumradius / inradius of element t (2 for equilateral triangles).
inline double aspect_ratio(const Mesh& mesh, int t) {
  const auto& v = mesh.element(t).vertices;
  const double a = (mesh.vertex(v[1]) - mesh.vertex(v[2])).norm();
  const double b = (mesh.vertex(v[0]) - mesh.vertex(v[2])).norm();
  const double c = (mesh.vertex(v[0]) - mesh.vertex(v[1])).norm();
  const double area = mesh.area(t);
  const double circum = a * b * c / (4.0 * area);
  const double in = 2.0 * area / (a + b + c);
  return circum / in;
}

/// Plain-text dump: vertex count, vertices, element count, element vertex triples.
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os.precision(17);
  os << mesh.num_vertices() << '\n';
  for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << '\n';
  os << mesh.num_elements() << '\n';
  for (const auto& el : mesh.elements()) {
    os << el.vertices[0] << ' ' << el.vertices[1] << ' ' << el.vertices[2] << '\n';
  }
}

}  // namespace ndg
