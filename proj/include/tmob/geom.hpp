#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

// Small fixed-capacity vector geometry with explicit tolerance semantics.
// Dimension is a runtime property (2 for the planar machine, up to kMaxDim
// for the higher-dimensional layouts); all predicates take an explicit
// tolerance where the result depends on one.

namespace tmob {

inline constexpr int kMaxDim = 6;

class Vec {
 public:
  Vec() : dim_(2) { c_.fill(0.0); }
  explicit Vec(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("bad dimension");
    c_.fill(0.0);
  }
  Vec(double x, double y) : dim_(2) {
    c_.fill(0.0);
    c_[0] = x;
    c_[1] = y;
  }
  Vec(double x, double y, double z) : dim_(3) {
    c_.fill(0.0);
    c_[0] = x;
    c_[1] = y;
    c_[2] = z;
  }
  static Vec zero(int dim) { return Vec(dim); }
  static Vec axis(int dim, int i, double scale = 1.0) {
    Vec v(dim);
    v[i] = scale;
    return v;
  }
  static Vec from(const std::vector<double>& xs) {
    Vec v(static_cast<int>(xs.size()));
    for (int i = 0; i < v.dim_; ++i) v.c_[i] = xs[i];
    return v;
  }

  int dim() const { return dim_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  double x() const { return c_[0]; }
  double y() const { return c_[1]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator/(Vec a, double s) { return a *= (1.0 / s); }
  friend Vec operator-(Vec a) { return a *= -1.0; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }
  // Lexicographic; used only to canonicalize snapshot multisets.
  friend bool operator<(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[i] < b.c_[i]) return true;
      if (a.c_[i] > b.c_[i]) return false;
    }
    return false;
  }

  bool finite() const {
    for (int i = 0; i < dim_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_;
  int dim_;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

inline Vec normalized(const Vec& a) {
  double n = norm(a);
  if (n == 0.0) throw std::domain_error("cannot normalize zero vector");
  return a / n;
}

// Component of v orthogonal to the unit vector u.
inline Vec reject(const Vec& v, const Vec& u) { return v - dot(v, u) * u; }

// 2D scalar cross product (z component); callers must be in dimension 2.
inline double cross2(const Vec& a, const Vec& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// --- tolerance predicates -------------------------------------------------

// Unsigned angle at `vertex` between the rays toward a and b, in [0, pi].
inline double angle_at(const Vec& vertex, const Vec& a, const Vec& b) {
  Vec va = a - vertex;
  Vec vb = b - vertex;
  double na = norm(va), nb = norm(vb);
  if (na == 0.0 || nb == 0.0) throw std::domain_error("zero-length angle arm");
  double c = dot(va, vb) / (na * nb);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

// Distance from p to the closed segment ab.
inline double dist_to_segment(const Vec& p, const Vec& a, const Vec& b) {
  Vec ab = b - a;
  double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

inline bool on_segment(const Vec& p, const Vec& a, const Vec& b, double eta) {
  return dist_to_segment(p, a, b) <= eta;
}

// Distance from p to the closed triangle abc (0 when inside). Points are
// projected onto the plane of the triangle first, so this also works for
// triangles embedded in higher dimension.
inline double dist_to_triangle(const Vec& p, const Vec& a, const Vec& b,
                               const Vec& c) {
  Vec u = b - a;
  Vec v = c - a;
  Vec w = p - a;
  double uu = dot(u, u), uv = dot(u, v), vv = dot(v, v);
  double wu = dot(w, u), wv = dot(w, v);
  double det = uu * vv - uv * uv;
  if (det <= 0.0) {
    // degenerate triangle: fall back to the nearest edge
    return std::min({dist_to_segment(p, a, b), dist_to_segment(p, b, c),
                     dist_to_segment(p, a, c)});
  }
  double s = (vv * wu - uv * wv) / det;
  double t = (uu * wv - uv * wu) / det;
  if (s >= 0.0 && t >= 0.0 && s + t <= 1.0) {
    // inside in barycentric terms; residual is the out-of-plane component
    Vec foot = a + s * u + t * v;
    return dist(p, foot);
  }
  return std::min({dist_to_segment(p, a, b), dist_to_segment(p, b, c),
                   dist_to_segment(p, a, c)});
}

inline bool in_triangle(const Vec& p, const Vec& a, const Vec& b, const Vec& c,
                        double eta) {
  return dist_to_triangle(p, a, b, c) <= eta;
}

// --- circle / line intersections (planar) ----------------------------------

// All intersection points of circles (c1,r1) and (c2,r2). Tangency within
// eta of the boundary distance collapses to a single point so downstream
// "closest point" selections stay unambiguous.
inline std::vector<Vec> intersect_circles(const Vec& c1, double r1,
                                          const Vec& c2, double r2,
                                          double eta) {
  if (r1 <= 0.0 || r2 <= 0.0) throw std::invalid_argument("radius must be positive");
  double d = dist(c1, c2);
  if (d <= eta) throw std::domain_error("degenerate circle pair");
  double outer_gap = d - (r1 + r2);           // >0: disjoint outside
  double inner_gap = std::abs(r1 - r2) - d;   // >0: one inside the other
  Vec e = (c2 - c1) / d;
  if (std::abs(outer_gap) <= eta) {
    return {c1 + r1 * e};  // external tangency
  }
  if (std::abs(inner_gap) <= eta) {
    double s = (r1 >= r2) ? 1.0 : -1.0;
    return {c1 + (s * r1) * e};  // internal tangency
  }
  if (outer_gap > 0.0 || inner_gap > 0.0) return {};
  double a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
  double h2 = r1 * r1 - a * a;
  double h = std::sqrt(std::max(0.0, h2));
  Vec base = c1 + a * e;
  Vec n(-e.y(), e.x());
  return {base + h * n, base - h * n};
}

// Intersection of lines p1 + t*v1 and p2 + s*v2 (planar).
inline Vec line_intersection(const Vec& p1, const Vec& v1, const Vec& p2,
                             const Vec& v2, double eta) {
  double den = cross2(v1, v2);
  if (std::abs(den) <= eta * norm(v1) * norm(v2))
    throw std::domain_error("parallel");
  double t = cross2(p2 - p1, v2) / den;
  return p1 + t * v1;
}

// Nearest point to `ref` on the intersection of the sphere (center,
// radius) with the sphere of diameter (center, other). Dimension-agnostic:
// in the plane the intersection is the usual 0..2 point set; in higher
// dimension it is a circle and the nearest point on it is returned.
// This is the Reference robot's target construction.
inline Vec nearest_on_circle_pair(const Vec& center, double radius,
                                  const Vec& other, const Vec& ref,
                                  double eta) {
  Vec mid = 0.5 * (center + other);
  double rho = 0.5 * dist(center, other);
  double d = dist(center, mid);
  if (d <= eta) throw std::domain_error("degenerate circle pair");
  Vec e = (mid - center) / d;
  double a = (d * d + radius * radius - rho * rho) / (2.0 * d);
  double h2 = radius * radius - a * a;
  Vec ring_center = center + a * e;
  if (h2 <= eta * eta) return ring_center;  // tangency collapses
  double h = std::sqrt(h2);
  Vec radial = reject(ref - ring_center, e);
  double rn = norm(radial);
  if (rn <= eta) {
    // ref on the axis: every ring point is equidistant; pick a stable one
    Vec fallback = reject(other - ring_center, e);
    double fn = norm(fallback);
    if (fn <= eta) throw std::domain_error("degenerate circle pair");
    return ring_center + (h / fn) * fallback;
  }
  return ring_center + (h / rn) * radial;
}

// --- frames -----------------------------------------------------------------

// A rigid (possibly reflecting) local coordinate system. Axes are rows of
// the world-from-local rotation; they stay fixed for a robot's lifetime.
struct Frame {
  Vec origin;
  std::vector<Vec> axes;  // orthonormal, axes.size() == dim
  int handedness = +1;

  int dim() const { return origin.dim(); }

  static Frame identity(int dim) {
    Frame f;
    f.origin = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) f.axes.push_back(Vec::axis(dim, i));
    f.handedness = +1;
    return f;
  }

  // Planar frame rotated by `theta`; if reflect, the y axis is mirrored.
  static Frame planar(const Vec& origin, double theta, bool reflect = false) {
    Frame f;
    f.origin = origin;
    Vec ex(std::cos(theta), std::sin(theta));
    Vec ey(-std::sin(theta), std::cos(theta));
    if (reflect) ey = -ey;
    f.axes = {ex, ey};
    f.handedness = reflect ? -1 : +1;
    return f;
  }

  Vec to_local(const Vec& world) const { return to_local_from(origin, world); }
  Vec to_world(const Vec& local) const { return to_world_from(origin, local); }

  // A robot's coordinate origin follows the robot; only the orientation is
  // pinned. These map relative to an explicit base point.
  Vec to_local_from(const Vec& base, const Vec& world) const {
    Vec r(dim());
    Vec d = world - base;
    for (int i = 0; i < dim(); ++i) r[i] = dot(axes[i], d);
    return r;
  }

  Vec to_world_from(const Vec& base, const Vec& local) const {
    Vec r = base;
    for (int i = 0; i < dim(); ++i) r += local[i] * axes[i];
    return r;
  }

  Vec direction_to_world(const Vec& local) const {
    Vec r = Vec::zero(dim());
    for (int i = 0; i < dim(); ++i) r += local[i] * axes[i];
    return r;
  }

  // Axes pairwise orthogonal and unit within tol.
  bool orthonormal(double tol = 1e-12) const {
    if (static_cast<int>(axes.size()) != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      if (std::abs(norm(axes[i]) - 1.0) > tol) return false;
      for (int j = i + 1; j < dim(); ++j)
        if (std::abs(dot(axes[i], axes[j])) > tol) return false;
    }
    return true;
  }
};

}  // namespace tmob
