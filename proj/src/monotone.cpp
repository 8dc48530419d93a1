#include "mvsde/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvsde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(const Eigen::Ref<const Vector>& x, const char* what) {
  if (!x.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

void require_dimension(const ConvexDomain& d, const Eigen::Ref<const Vector>& x) {
  if (x.size() != d.dimension()) {
    throw InvalidArgument("dimension mismatch: domain " + std::to_string(d.dimension()) +
                          ", point " + std::to_string(x.size()));
  }
}

// Distance from p to the segment [a, b] in the plane.
double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(px - (ax + s * dx), py - (ay + s * dy));
}

// Distance from p to the ray a + s*(dx, dy), s >= 0.
double ray_distance(double px, double py, double ax, double ay, double dx, double dy) {
  const double len2 = dx * dx + dy * dy;
  const double s = std::max(0.0, ((px - ax) * dx + (py - ay) * dy) / len2);
  return std::hypot(px - (ax + s * dx), py - (ay + s * dy));
}

}  // namespace

ConvexDomain ConvexDomain::halfspace(const Vector& normal, double offset) {
  if (normal.size() == 0 || !normal.allFinite() || !std::isfinite(offset)) {
    throw InvalidArgument("halfspace: normal and offset must be finite");
  }
  const double len = normal.norm();
  if (len == 0.0) throw InvalidArgument("halfspace: normal must be nonzero");
  return ConvexDomain(Halfspace{normal / len, offset / len});
}

ConvexDomain ConvexDomain::box(const Vector& lower, const Vector& upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw InvalidArgument("box: lower and upper must have equal positive size");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || !(lower(i) < upper(i)) ||
        lower(i) == kInf || upper(i) == -kInf) {
      throw InvalidArgument("box: need lower < upper in every coordinate (empty interior)");
    }
  }
  return ConvexDomain(Box{lower, upper});
}

ConvexDomain ConvexDomain::ball(const Vector& center, double radius) {
  if (center.size() == 0 || !center.allFinite()) throw InvalidArgument("ball: center must be finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("ball: radius must be positive and finite");
  }
  return ConvexDomain(Ball{center, radius});
}

ConvexDomain ConvexDomain::halfline(double start) {
  if (!std::isfinite(start)) throw InvalidArgument("halfline: start must be finite");
  return ConvexDomain(Halfline{start});
}

Eigen::Index ConvexDomain::dimension() const {
  return std::visit(Overloaded{[](const Halfspace& h) { return h.normal.size(); },
                               [](const Box& b) { return b.lower.size(); },
                               [](const Ball& b) { return b.center.size(); },
                               [](const Halfline&) { return Eigen::Index{1}; }},
                    shape_);
}

Vector project(const ConvexDomain& domain, const Eigen::Ref<const Vector>& x) {
  require_dimension(domain, x);
  return std::visit(
      Overloaded{[&](const Halfspace& h) -> Vector {
                   const double s = h.normal.dot(x) - h.offset;
                   if (s <= 0.0) return x;
                   return x - s * h.normal;
                 },
                 [&](const Box& b) -> Vector { return x.cwiseMax(b.lower).cwiseMin(b.upper); },
                 [&](const Ball& b) -> Vector {
                   const Vector r = x - b.center;
                   const double n = r.norm();
                   if (n <= b.radius) return x;
                   return b.center + (b.radius / n) * r;
                 },
                 [&](const Halfline& h) -> Vector {
                   Vector p(1);
                   p(0) = std::max(x(0), h.start);
                   return p;
                 }},
      domain.shape());
}

double distance_to(const ConvexDomain& domain, const Eigen::Ref<const Vector>& x) {
  return (x - project(domain, x)).norm();
}

bool in_normal_cone(const ConvexDomain& domain, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& v, double tol) {
  require_dimension(domain, x);
  require_dimension(domain, v);
  const double tx = tol * (1.0 + x.norm());
  const double tv = tol * (1.0 + v.norm());
  if (distance_to(domain, x) > tx) {
    throw DomainViolation("in_normal_cone: base point lies outside the domain");
  }
  return std::visit(
      Overloaded{[&](const Halfspace& h) {
                   const double vn = v.dot(h.normal);
                   if ((v - vn * h.normal).norm() > tv) return false;
                   if (vn < -tv) return false;
                   if (vn > tv) return std::abs(h.normal.dot(x) - h.offset) <= tx;
                   return true;
                 },
                 [&](const Box& b) {
                   for (Eigen::Index i = 0; i < x.size(); ++i) {
                     if (v(i) > tv && !(x(i) >= b.upper(i) - tx)) return false;
                     if (v(i) < -tv && !(x(i) <= b.lower(i) + tx)) return false;
                   }
                   return true;
                 },
                 [&](const Ball& b) {
                   if (v.norm() <= tv) return true;
                   const Vector r = x - b.center;
                   const double rn = r.norm();
                   if (rn < b.radius - tx) return false;
                   const Vector u = r / rn;
                   const double vu = v.dot(u);
                   return vu > 0.0 && (v - vu * u).norm() <= tv;
                 },
                 [&](const Halfline& h) {
                   if (v(0) > tv) return false;
                   if (v(0) < -tv) return x(0) <= h.start + tx;
                   return true;
                 }},
      domain.shape());
}

Vector interior_point(const ConvexDomain& domain) {
  return std::visit(Overloaded{[](const Halfspace& h) -> Vector { return (h.offset - 1.0) * h.normal; },
                               [](const Box& b) -> Vector {
                                 Vector c(b.lower.size());
                                 for (Eigen::Index i = 0; i < c.size(); ++i) {
                                   const bool lo = std::isfinite(b.lower(i));
                                   const bool hi = std::isfinite(b.upper(i));
                                   if (lo && hi) {
                                     c(i) = 0.5 * (b.lower(i) + b.upper(i));
                                   } else if (lo) {
                                     c(i) = b.lower(i) + 1.0;
                                   } else if (hi) {
                                     c(i) = b.upper(i) - 1.0;
                                   } else {
                                     c(i) = 0.0;
                                   }
                                 }
                                 return c;
                               },
                               [](const Ball& b) -> Vector { return b.center; },
                               [](const Halfline& h) -> Vector { return Vector::Constant(1, h.start + 1.0); }},
                    domain.shape());
}

MonotoneGraph::MonotoneGraph(std::vector<GraphVertex> vertices, GraphEnd left, GraphEnd right)
    : vertices_(std::move(vertices)), left_(left), right_(right) {
  if (vertices_.empty()) throw InvalidArgument("monotone graph needs at least one vertex");
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw InvalidArgument("graph vertex not finite");
  }
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    const double dx = vertices_[i].x - vertices_[i - 1].x;
    const double dy = vertices_[i].y - vertices_[i - 1].y;
    if (dx < 0.0 || dy < 0.0) throw InvalidArgument("graph vertices must be nondecreasing in x and y");
    if (dx == 0.0 && dy == 0.0) throw InvalidArgument("graph has repeated vertices");
  }
  for (const GraphEnd* e : {&left_, &right_}) {
    if (!e->vertical && (!(e->slope >= 0.0) || !std::isfinite(e->slope))) {
      throw InvalidArgument("graph end slope must be finite and >= 0");
    }
  }
}

MonotoneGraph MonotoneGraph::sign() {
  return MonotoneGraph({{0.0, -1.0}, {0.0, 1.0}}, GraphEnd{false, 0.0}, GraphEnd{false, 0.0});
}

MonotoneGraph MonotoneGraph::affine(double slope, double intercept) {
  return MonotoneGraph({{0.0, intercept}}, GraphEnd{false, slope}, GraphEnd{false, slope});
}

double MonotoneGraph::domain_lower() const { return left_.vertical ? vertices_.front().x : -kInf; }

double MonotoneGraph::domain_upper() const { return right_.vertical ? vertices_.back().x : kInf; }

double MonotoneGraph::resolve(double lambda, double z) const {
  // h = x + lambda*y increases strictly along the curve, so the solution is
  // the unique curve point with h = z.
  const auto h = [&](const GraphVertex& v) { return v.x + lambda * v.y; };
  const GraphVertex& first = vertices_.front();
  const GraphVertex& last = vertices_.back();
  if (z <= h(first)) {
    if (left_.vertical) return first.x;
    return first.x - (h(first) - z) / (1.0 + lambda * left_.slope);
  }
  if (z >= h(last)) {
    if (right_.vertical) return last.x;
    return last.x + (z - h(last)) / (1.0 + lambda * right_.slope);
  }
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    const double h0 = h(vertices_[i]);
    const double h1 = h(vertices_[i + 1]);
    if (z <= h1) {
      if (!(h1 > h0)) throw InternalConsistencyError("graph resolvent: non-increasing curve parameter");
      const double s = (z - h0) / (h1 - h0);
      return vertices_[i].x + s * (vertices_[i + 1].x - vertices_[i].x);
    }
  }
  throw InternalConsistencyError("graph resolvent: no curve point matched");
}

double MonotoneGraph::distance(double x, double v) const {
  double best = kInf;
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    best = std::min(best, segment_distance(x, v, vertices_[i].x, vertices_[i].y, vertices_[i + 1].x,
                                           vertices_[i + 1].y));
  }
  const GraphVertex& first = vertices_.front();
  const GraphVertex& last = vertices_.back();
  if (left_.vertical) {
    best = std::min(best, ray_distance(x, v, first.x, first.y, 0.0, -1.0));
  } else {
    best = std::min(best, ray_distance(x, v, first.x, first.y, -1.0, -left_.slope));
  }
  if (right_.vertical) {
    best = std::min(best, ray_distance(x, v, last.x, last.y, 0.0, 1.0));
  } else {
    best = std::min(best, ray_distance(x, v, last.x, last.y, 1.0, right_.slope));
  }
  return best;
}

Vector resolvent(const MonotoneOperator& op, double lambda, const Eigen::Ref<const Vector>& x) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("resolvent: lambda must be > 0");
  require_finite(x, "resolvent input");
  return std::visit(Overloaded{[&](const ZeroOperator&) -> Vector { return x; },
                               [&](const NormalCone& nc) -> Vector { return project(nc.domain, x); },
                               [&](const MonotoneGraph& g) -> Vector {
                                 Vector y(x.size());
                                 for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = g.resolve(lambda, x(i));
                                 return y;
                               }},
                    op);
}

Vector yosida(const MonotoneOperator& op, double lambda, const Eigen::Ref<const Vector>& x) {
  return (x - resolvent(op, lambda, x)) / lambda;
}

double domain_distance(const MonotoneOperator& op, const Eigen::Ref<const Vector>& x) {
  return std::visit(Overloaded{[&](const ZeroOperator&) { return 0.0; },
                               [&](const NormalCone& nc) { return distance_to(nc.domain, x); },
                               [&](const MonotoneGraph& g) {
                                 double s = 0.0;
                                 for (Eigen::Index i = 0; i < x.size(); ++i) {
                                   const double c = std::clamp(x(i), g.domain_lower(), g.domain_upper());
                                   s += (x(i) - c) * (x(i) - c);
                                 }
                                 return std::sqrt(s);
                               }},
                    op);
}

bool in_graph(const MonotoneOperator& op, const OperatorPoint& p, double tol) {
  if (p.x.size() != p.v.size()) throw InvalidArgument("operator point: x and v sizes differ");
  return std::visit(Overloaded{[&](const ZeroOperator&) { return p.v.norm() <= tol * (1.0 + p.x.norm()); },
                               [&](const NormalCone& nc) { return in_normal_cone(nc.domain, p.x, p.v, tol); },
                               [&](const MonotoneGraph& g) {
                                 for (Eigen::Index i = 0; i < p.x.size(); ++i) {
                                   const double scale = 1.0 + std::abs(p.x(i)) + std::abs(p.v(i));
                                   if (g.distance(p.x(i), p.v(i)) > tol * scale) return false;
                                 }
                                 return true;
                               }},
                    op);
}

bool is_normal_cone_or_zero(const MonotoneOperator& op) {
  return !std::holds_alternative<MonotoneGraph>(op);
}

}  // namespace mvsde
