#pragma once

// Arc quadrature on circle boundaries (Gauss-Legendre panels with endpoint
// grading), path integration along disk-avoiding polylines, and one-sided
// Cauchy boundary limits via singularity subtraction (Sokhotski-Plemelj).

#include <functional>
#include <vector>

#include "mch/geometry.hpp"

namespace mch {

// Counterclockwise arc of circle `circle_index` from start_angle to
// end_angle; the angular span end-start is normalized into (0, 2*pi].
struct Arc {
  int circle_index = 0;
  double start_angle = 0.0;
  double end_angle = 0.0;
};

double arc_span(const Arc& a);  // in (0, 2*pi]

struct QuadratureRule {
  int panels_per_arc = 16;
  int nodes_per_panel = 12;
  double endpoint_grading = 0.5;  // in (0,1]; <1 clusters panels at endpoints
  void validate() const;
};

// Gauss-Legendre nodes/weights on [-1,1] (cached per n).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Panel breakpoints of [0,1] graded toward both endpoints.
std::vector<double> graded_breakpoints(int panels, double grading);

// Quadrature nodes for one arc: complex positions tau and complex weights w
// such that  ∮_arc f(tau) dtau  ≈  Σ f(tau_i) * w_i   (counterclockwise).
struct ArcNodes {
  std::vector<double> theta;
  std::vector<Cx> tau;
  std::vector<Cx> w;
};
ArcNodes build_arc_nodes(const Circle& c, const Arc& a, const QuadratureRule& r);

Cx integrate_arc(const Circle& c, const Arc& a, const QuadratureRule& r,
                 const std::function<Cx(Cx)>& f);

// ---------------------------------------------------------------------------
// Paths

struct PathLeg {
  std::function<Cx(double)> point;     // s in [0,1]
  std::function<Cx(double)> velocity;  // d point / ds
  double length_hint = 0.0;
};

PathLeg segment_leg(Cx a, Cx b);
PathLeg circular_leg(Cx center, double radius, double theta0, double theta1);
// Image of a leg under reflection in a circle (anti-conformal).
PathLeg reflected_leg(const Circle& c, const PathLeg& leg);

Cx integrate_leg(const PathLeg& leg, int panels, int nodes,
                 const std::function<Cx(Cx)>& f);
Cx integrate_path(const std::vector<PathLeg>& legs, int panels, int nodes,
                  const std::function<Cx(Cx)>& f);

// Waypoints of a polyline from `from` to `to` that keeps a clearance of
// clearance_factor * radius from every disk (endpoints may lie on circles).
std::vector<Cx> avoiding_polyline(const DomainSpec& dom, Cx from, Cx to,
                                  double clearance_factor = 0.1);
std::vector<PathLeg> polyline_legs(const std::vector<Cx>& waypoints);

// ---------------------------------------------------------------------------
// Boundary limits

// Side of the boundary limit relative to the counterclockwise traversal:
// plus = left of the traversal = disk interior, minus = domain side.
enum class Side { plus, minus };

// The full boundary L as a union of per-circle arc partitions, with
// quadrature nodes flattened for whole-contour Cauchy-type integrals.
struct BoundaryGrid {
  DomainSpec domain;
  QuadratureRule rule;
  // Minimum angular distance from arc endpoints for one-sided limits; set by
  // build_boundary_grid from the innermost graded panel width.
  double guard_angle = 3.14159265358979323846 / 90.0;

  struct Node {
    int circle = 0;
    int arc = 0;  // index within the circle's partition
    double theta = 0.0;
    Cx tau;
    Cx w;
  };
  std::vector<Node> nodes;
  // [circle][arc] -> (first node, count)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> arc_ranges;
  std::vector<std::vector<Arc>> arcs;  // the ccw arcs themselves

  std::size_t size() const { return nodes.size(); }
};

// arcs_per_circle[nu] lists the ccw arcs partitioning circle nu (they must
// cover the full circle for Plemelj limits to be meaningful).
BoundaryGrid build_boundary_grid(const DomainSpec& dom,
                                 const std::vector<std::vector<Arc>>& arcs_per_circle,
                                 const QuadratureRule& rule);

// F(z) = (1/2pi i) ∮_L g(tau) kernel(z,tau) dtau over the ccw grid, z off L.
Cx cauchy_integral(const BoundaryGrid& grid,
                   const std::function<Cx(Cx, Cx)>& kernel,
                   const std::vector<Cx>& density, Cx z);

// One-sided limit of the same integral at t = point(circle_index, theta_t).
// kernel(z,tau) must be of Cauchy type: 1/(tau-z) + (smooth in tau on L).
// `density` holds g at the grid nodes, g_t is g at the target point.
// With ccw traversal the jump is  limit(plus) - limit(minus) = g_t.
// Throws when t is within the guard angle of an arc endpoint.
Cx cauchy_boundary_limit(const BoundaryGrid& grid,
                         const std::function<Cx(Cx, Cx)>& kernel,
                         const std::vector<Cx>& density, int circle_index,
                         double theta_t, Cx g_t, Side side);

// Cross-check variant: evaluate at offset points t ± eps*normal and
// Richardson-extrapolate toward the boundary. Less accurate; kept as an
// independent check on the subtraction path.
Cx cauchy_offset_limit(const BoundaryGrid& grid,
                       const std::function<Cx(Cx, Cx)>& kernel,
                       const std::vector<Cx>& density, int circle_index,
                       double theta_t, Side side, double eps_rel = 0.05);

}  // namespace mch
