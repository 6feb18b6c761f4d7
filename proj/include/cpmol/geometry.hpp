#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cpmol/errors.hpp"
#include "cpmol/mesh.hpp"

namespace cpmol {

/// Points live in R^3; two-dimensional embeddings keep z = 0.
using Point = Vec3;
using Vec2 = Eigen::Vector2d;

/// Result of a closest point query.
struct CpResult {
  Point cp = Point::Zero();
  double dist = 0.0;
  /// Surface parameter of cp: (s, 0) on curves, (theta, phi) on spheres.
  std::optional<Vec2> param;
  /// Set when the query point lies farther than the caller's declared band.
  bool outside_band = false;
};

/// A point on the surface together with its parameter.
struct SurfaceSample {
  Point point = Point::Zero();
  Vec2 param = Vec2::Zero();
};

struct Circle {
  Point center = Point::Zero();
  double radius = 1.0;
};

struct Sphere {
  Point center = Point::Zero();
  double radius = 1.0;
};

/// Closed plane curve s -> sigma(s), 2*pi periodic, with its first two
/// derivatives.
struct ParametricCurve {
  std::function<Vec2(double)> position;
  std::function<Vec2(double)> velocity;
  std::function<Vec2(double)> acceleration;
};

/// Closest-point queryable closed surface. Cheap to copy, immutable.
class Surface {
 public:
  using Shape = std::variant<Circle, Sphere, ParametricCurve, TriangleMesh>;

  static Surface circle(double radius = 1.0, Point center = Point::Zero()) {
    if (!(radius > 0.0)) throw InvalidArgument("circle radius must be positive");
    center.z() = 0.0;
    return Surface("circle", Circle{center, radius});
  }

  static Surface sphere(double radius = 1.0, Point center = Point::Zero()) {
    if (!(radius > 0.0)) throw InvalidArgument("sphere radius must be positive");
    return Surface("sphere", Sphere{center, radius});
  }

  static Surface parametric_curve(std::string name, ParametricCurve curve) {
    if (!curve.position || !curve.velocity || !curve.acceleration) {
      throw InvalidArgument("parametric curve needs position, velocity and acceleration");
    }
    return Surface(std::move(name), std::move(curve));
  }

  /// Ellipse x = a cos s, y = b sin s.
  static Surface ellipse(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("ellipse semi-axes must be positive");
    return parametric_curve("ellipse", ParametricCurve{
                                           [a, b](double s) { return Vec2(a * std::cos(s), b * std::sin(s)); },
                                           [a, b](double s) { return Vec2(-a * std::sin(s), b * std::cos(s)); },
                                           [a, b](double s) { return Vec2(-a * std::cos(s), -b * std::sin(s)); },
                                       });
  }

  /// Polar curve r(s) = 1 + amplitude cos(lobes s).
  static Surface snowflake(double amplitude = 1.0 / 3.0, int lobes = 6) {
    const double m = lobes;
    auto r = [=](double s) { return 1.0 + amplitude * std::cos(m * s); };
    auto dr = [=](double s) { return -amplitude * m * std::sin(m * s); };
    auto ddr = [=](double s) { return -amplitude * m * m * std::cos(m * s); };
    return parametric_curve(
        "snowflake",
        ParametricCurve{
            [=](double s) { return Vec2(r(s) * std::cos(s), r(s) * std::sin(s)); },
            [=](double s) {
              const double c = std::cos(s), sn = std::sin(s);
              return Vec2(dr(s) * c - r(s) * sn, dr(s) * sn + r(s) * c);
            },
            [=](double s) {
              const double c = std::cos(s), sn = std::sin(s);
              return Vec2(ddr(s) * c - 2.0 * dr(s) * sn - r(s) * c, ddr(s) * sn + 2.0 * dr(s) * c - r(s) * sn);
            },
        });
  }

  static Surface mesh(TriangleMesh mesh, std::string name = "mesh") {
    return Surface(std::move(name), std::move(mesh));
  }

  const std::string& name() const { return name_; }
  const Shape& shape() const { return *shape_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(shape_.get());
  }

  int embedding_dim() const {
    return std::holds_alternative<Circle>(*shape_) || std::holds_alternative<ParametricCurve>(*shape_) ? 2 : 3;
  }
  int surface_dim() const { return embedding_dim() - 1; }
  bool is_parameterized() const { return !std::holds_alternative<TriangleMesh>(*shape_); }

  /// Coarse samples used to bracket curve minima.
  const std::vector<Vec2>& curve_samples() const { return *curve_samples_; }

 private:
  static constexpr int kCurveSamples = 1024;

  Surface(std::string name, Shape shape)
      : name_(std::move(name)), shape_(std::make_shared<const Shape>(std::move(shape))) {
    auto samples = std::make_shared<std::vector<Vec2>>();
    if (const auto* c = std::get_if<ParametricCurve>(shape_.get())) {
      samples->reserve(kCurveSamples);
      for (int i = 0; i < kCurveSamples; ++i) samples->push_back(c->position(2.0 * std::numbers::pi * i / kCurveSamples));
    }
    curve_samples_ = std::move(samples);
  }

  std::string name_;
  std::shared_ptr<const Shape> shape_;
  std::shared_ptr<const std::vector<Vec2>> curve_samples_;
};

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_angle(double s) {
  s = std::fmod(s, kTwoPi);
  return s < 0.0 ? s + kTwoPi : s;
}

inline bool nearly_equidistant(double best, double second) { return second - best < 1e-9 * (1.0 + best); }

/// Minimize |x - sigma(s)|^2 on [lo, hi] given a starting guess, by
/// Newton iterations on g(s) = (sigma(s) - x) . sigma'(s) = 0,
/// safeguarded by bisection when [lo, hi] brackets a sign change of g.
inline double refine_curve_parameter(const ParametricCurve& c, const Vec2& x, double lo, double hi, double s) {
  auto g = [&](double t) { return (c.position(t) - x).dot(c.velocity(t)); };
  auto dg = [&](double t) {
    const Vec2 v = c.velocity(t);
    return v.squaredNorm() + (c.position(t) - x).dot(c.acceleration(t));
  };
  const bool bracketed = g(lo) <= 0.0 && g(hi) >= 0.0;
  if (!bracketed) {
    // golden-section on the distance, then unguarded Newton polish
    auto f = [&](double t) { return (c.position(t) - x).squaredNorm(); };
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double m1 = b - ratio * (b - a), m2 = a + ratio * (b - a);
    double f1 = f(m1), f2 = f(m2);
    while (b - a > 1e-10) {
      if (f1 < f2) {
        b = m2;
        m2 = m1;
        f2 = f1;
        m1 = b - ratio * (b - a);
        f1 = f(m1);
      } else {
        a = m1;
        m1 = m2;
        f1 = f2;
        m2 = a + ratio * (b - a);
        f2 = f(m2);
      }
    }
    s = 0.5 * (a + b);
    for (int it = 0; it < 8; ++it) {
      const double d = dg(s);
      if (!(d > 0.0)) break;
      const double step = g(s) / d;
      s -= step;
      if (std::abs(step) < 1e-14) break;
    }
    return s;
  }
  for (int it = 0; it < 100; ++it) {
    const double gs = g(s);
    if (gs == 0.0) break;
    if (gs < 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    const double d = dg(s);
    double next = d > 0.0 ? s - gs / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - s);
    s = next;
    if (step < 1e-13 || hi - lo < 1e-15) break;
  }
  return s;
}

inline CpResult curve_closest_point(const Surface& surface, const ParametricCurve& c, const Point& x) {
  const Vec2 xp(x.x(), x.y());
  const auto& samples = surface.curve_samples();
  const int n = static_cast<int>(samples.size());
  const double h = kTwoPi / n;
  std::vector<double> d2(n);
  for (int i = 0; i < n; ++i) d2[i] = (samples[i] - xp).squaredNorm();

  struct Candidate {
    double dist;
    double s;
    Vec2 point;
  };
  std::vector<Candidate> minima;
  for (int i = 0; i < n; ++i) {
    const double prev = d2[(i + n - 1) % n];
    const double next = d2[(i + 1) % n];
    if (!(d2[i] < prev && d2[i] <= next)) continue;
    const double s = refine_curve_parameter(c, xp, (i - 1) * h, (i + 1) * h, i * h);
    const Vec2 p = c.position(s);
    minima.push_back({(p - xp).norm(), wrap_angle(s), p});
  }
  if (minima.empty()) {
    // constant distance over all samples: x is a centre of symmetry
    throw AmbiguousClosestPoint("closest point undefined: all curve samples equidistant");
  }
  std::sort(minima.begin(), minima.end(), [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });
  const Candidate& best = minima.front();
  for (std::size_t k = 1; k < minima.size(); ++k) {
    if (!nearly_equidistant(best.dist, minima[k].dist)) break;
    if ((minima[k].point - best.point).norm() > 1e-7) {
      throw AmbiguousClosestPoint("point is equidistant to two curve points (medial axis)");
    }
  }
  CpResult r;
  r.cp = Point(best.point.x(), best.point.y(), 0.0);
  r.dist = (x - r.cp).norm();
  r.param = Vec2(best.s, 0.0);
  return r;
}

}  // namespace detail

/// Euclidean closest point of x on the surface. Points farther than
/// max_dist still get a best-effort answer, flagged outside_band.
inline CpResult closest_point(const Surface& surface, const Point& x,
                              double max_dist = std::numeric_limits<double>::infinity()) {
  CpResult r = std::visit(
      [&](const auto& shape) -> CpResult {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Circle> || std::is_same_v<T, Sphere>) {
          Point rel = x - shape.center;
          if constexpr (std::is_same_v<T, Circle>) rel.z() = 0.0;
          const double rho = rel.norm();
          if (2.0 * rho < 1e-9 * (1.0 + shape.radius)) {
            throw AmbiguousClosestPoint("point coincides with the centre of the " + surface.name());
          }
          CpResult out;
          out.cp = shape.center + rel * (shape.radius / rho);
          out.dist = std::abs(rho - shape.radius);
          if constexpr (std::is_same_v<T, Circle>) {
            out.param = Vec2(detail::wrap_angle(std::atan2(rel.y(), rel.x())), 0.0);
          } else {
            out.param = Vec2(std::atan2(rel.y(), rel.x()), std::asin(std::clamp(rel.z() / rho, -1.0, 1.0)));
          }
          return out;
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          return detail::curve_closest_point(surface, shape, x);
        } else {
          const MeshHit hit = shape.closest(x);
          CpResult out;
          out.cp = hit.point;
          out.dist = std::sqrt(hit.dist2);
          return out;
        }
      },
      surface.shape());
  r.outside_band = r.dist > max_dist;
  return r;
}

/// Mesh query through the bounding-box tree; identical to the
/// exhaustive scan (see TriangleMesh::brute_force_closest).
inline CpResult closest_point_mesh(const Surface& surface, const Point& x) {
  const auto* mesh = surface.get_if<TriangleMesh>();
  if (mesh == nullptr) throw Unsupported("closest_point_mesh called on non-mesh surface " + surface.name());
  const MeshHit hit = mesh->closest(x);
  CpResult out;
  out.cp = hit.point;
  out.dist = std::sqrt(hit.dist2);
  return out;
}

/// Point on the surface for a parameter value.
inline Point surface_point(const Surface& surface, const Vec2& param) {
  if (const auto* c = surface.get_if<Circle>()) {
    return c->center + c->radius * Point(std::cos(param[0]), std::sin(param[0]), 0.0);
  }
  if (const auto* s = surface.get_if<Sphere>()) {
    const double th = param[0], ph = param[1];
    return s->center + s->radius * Point(std::cos(th) * std::cos(ph), std::sin(th) * std::cos(ph), std::sin(ph));
  }
  if (const auto* c = surface.get_if<ParametricCurve>()) {
    const Vec2 p = c->position(param[0]);
    return {p.x(), p.y(), 0.0};
  }
  throw Unsupported("surface " + surface.name() + " has no parameterization");
}

/// n points on the surface with their parameters. Curves: uniform in s.
/// Sphere: m x m (theta, phi) grid with m = round(sqrt(n)), theta over
/// (-pi, pi] and cell-centred phi (no pole duplication). Mesh: vertices.
inline std::vector<SurfaceSample> sample_surface(const Surface& surface, std::size_t n) {
  if (n < 1) throw InvalidArgument("sample_surface needs n >= 1");
  std::vector<SurfaceSample> out;
  if (const auto* mesh = surface.get_if<TriangleMesh>()) {
    out.reserve(mesh->vertices().size());
    for (const Vec3& v : mesh->vertices()) out.push_back({v, Vec2::Zero()});
    return out;
  }
  if (surface.get_if<Sphere>() != nullptr) {
    const auto m = static_cast<std::size_t>(std::max<long>(1, std::lround(std::sqrt(static_cast<double>(n)))));
    out.reserve(m * m);
    for (std::size_t j = 0; j < m; ++j) {
      const double phi = -std::numbers::pi / 2.0 + std::numbers::pi * (static_cast<double>(j) + 0.5) / m;
      for (std::size_t i = 0; i < m; ++i) {
        const double theta = -std::numbers::pi + detail::kTwoPi * static_cast<double>(i + 1) / m;
        const Vec2 param(theta, phi);
        out.push_back({surface_point(surface, param), param});
      }
    }
    return out;
  }
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 param(detail::kTwoPi * static_cast<double>(i) / static_cast<double>(n), 0.0);
    out.push_back({surface_point(surface, param), param});
  }
  return out;
}

/// Curvature magnitude of a plane curve at parameter s:
/// |sigma' x sigma''| / |sigma'|^3.
inline double curve_curvature(const ParametricCurve& c, double s) {
  const Vec2 v = c.velocity(s);
  const Vec2 a = c.acceleration(s);
  const double speed = v.norm();
  return std::abs(v.x() * a.y() - v.y() * a.x()) / (speed * speed * speed);
}

/// Mean curvature (sum of principal curvatures) at a surface point y.
inline double exact_mean_curvature(const Surface& surface, const Point& y) {
  if (const auto* c = surface.get_if<Circle>()) return 1.0 / c->radius;
  if (const auto* s = surface.get_if<Sphere>()) return 2.0 / s->radius;
  if (const auto* c = surface.get_if<ParametricCurve>()) {
    const CpResult r = closest_point(surface, y);
    return curve_curvature(*c, (*r.param)[0]);
  }
  throw Unsupported("exact mean curvature is not available for " + surface.name());
}

}  // namespace cpmol
