#pragma once

// Maximal monotone operators on R^d and the resolvent / projection / normal
// cone primitives used to realize the multivalued drift term.

#include "mvsde/types.hpp"

#include <variant>
#include <vector>

namespace mvsde {

// {y : <normal, y> <= offset}; normal is stored with unit length.
struct Halfspace {
  Vector normal;
  double offset = 0.0;
};

// Componentwise [lower_i, upper_i]; entries may be +-infinity.
struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

// [start, inf) in dimension one.
struct Halfline {
  double start = 0.0;
};

// Closed convex set with nonempty interior. The factories reject degenerate
// shapes (zero radius, empty or flat boxes, zero normals).
class ConvexDomain {
 public:
  using Shape = std::variant<Halfspace, Box, Ball, Halfline>;

  static ConvexDomain halfspace(const Vector& normal, double offset);
  static ConvexDomain box(const Vector& lower, const Vector& upper);
  static ConvexDomain ball(const Vector& center, double radius);
  static ConvexDomain halfline(double start);

  const Shape& shape() const { return shape_; }
  // Ambient dimension; halfline is always 1.
  Eigen::Index dimension() const;

 private:
  explicit ConvexDomain(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

// Metric projection onto the domain.
Vector project(const ConvexDomain& domain, const Eigen::Ref<const Vector>& x);

double distance_to(const ConvexDomain& domain, const Eigen::Ref<const Vector>& x);

// Exact per-variant test of v in N_D(x). Tolerances scale with (1+|v|) for
// direction checks and (1+|x|) for boundary checks. Throws DomainViolation
// when x is farther than tol*(1+|x|) from the domain.
bool in_normal_cone(const ConvexDomain& domain, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& v, double tol);

// A point at positive distance from the boundary.
Vector interior_point(const ConvexDomain& domain);

struct GraphVertex {
  double x = 0.0;
  double y = 0.0;
};

// How the graph continues past its first or last vertex. A vertical end is a
// ray y -> -inf (left) or y -> +inf (right) at the end vertex's x, which
// bounds the domain; otherwise the graph extends with the given slope >= 0.
struct GraphEnd {
  bool vertical = false;
  double slope = 0.0;
};

// Maximal monotone graph in R x R, given as a continuous polyline that is
// nondecreasing in both coordinates and unbounded at both ends. Vertical
// pieces are the filled jumps; horizontal pieces are flat stretches. On R^d
// the graph acts coordinatewise.
class MonotoneGraph {
 public:
  MonotoneGraph(std::vector<GraphVertex> vertices, GraphEnd left, GraphEnd right);

  // A(x) = sign(x), A(0) = [-1, 1].
  static MonotoneGraph sign();
  // Single-valued affine map y = slope * x + intercept, slope >= 0.
  static MonotoneGraph affine(double slope, double intercept);

  const std::vector<GraphVertex>& vertices() const { return vertices_; }
  const GraphEnd& left() const { return left_; }
  const GraphEnd& right() const { return right_; }

  // Closure of the scalar domain.
  double domain_lower() const;
  double domain_upper() const;

  // Unique y with y + lambda * a = z, a in A(y).
  double resolve(double lambda, double z) const;
  // Euclidean distance in the plane from (x, v) to the graph.
  double distance(double x, double v) const;

 private:
  std::vector<GraphVertex> vertices_;
  GraphEnd left_;
  GraphEnd right_;
};

struct ZeroOperator {};

struct NormalCone {
  ConvexDomain domain;
};

// Declarative description of A. Graph variants act coordinatewise.
using MonotoneOperator = std::variant<ZeroOperator, NormalCone, MonotoneGraph>;

// A pair claimed to lie in Gr(A).
struct OperatorPoint {
  Vector x;
  Vector v;
};

// (I + lambda A)^{-1} x. Throws InvalidArgument for lambda <= 0 or
// non-finite x.
Vector resolvent(const MonotoneOperator& op, double lambda, const Eigen::Ref<const Vector>& x);

// (x - J_lambda x) / lambda, which lies in A(J_lambda x).
Vector yosida(const MonotoneOperator& op, double lambda, const Eigen::Ref<const Vector>& x);

// Distance from x to the closure of D(A).
double domain_distance(const MonotoneOperator& op, const Eigen::Ref<const Vector>& x);

// Membership of (p.x, p.v) in Gr(A) at the module tolerance policy.
bool in_graph(const MonotoneOperator& op, const OperatorPoint& p, double tol);

bool is_normal_cone_or_zero(const MonotoneOperator& op);

}  // namespace mvsde
