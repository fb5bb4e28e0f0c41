#include "mch/contour.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace mch {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double arc_span(const Arc& a) {
  double s = std::fmod(a.end_angle - a.start_angle, kTwoPi);
  if (s <= 0.0) s += kTwoPi;
  return s;
}

void QuadratureRule::validate() const {
  if (panels_per_arc < 1 || nodes_per_panel < 2)
    throw std::invalid_argument("quadrature rule: need >=1 panel, >=2 nodes");
  if (!(endpoint_grading > 0.0) || endpoint_grading > 1.0)
    throw std::invalid_argument("quadrature rule: grading must be in (0,1]");
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    // Newton iteration from the Chebyshev initial guess.
    for (int i = 0; i < n; ++i) {
      double xi = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double p0 = 0.0, p1 = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        p0 = 1.0;
        p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * xi * p1 - j * p2) / (j + 1.0);
        }
        const double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
        const double dx = p0 / dp;
        xi -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * xi * p1 - j * p2) / (j + 1.0);
      }
      const double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
      x[static_cast<std::size_t>(n - 1 - i)] = xi;
      w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    it = cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first;
  }
  nodes = it->second.first;
  weights = it->second.second;
}

std::vector<double> graded_breakpoints(int panels, double grading) {
  // Geometric panel sizes shrinking toward both endpoints of [0,1].
  const int left = panels / 2;
  const int right = panels - left;
  std::vector<double> sizes;
  sizes.reserve(static_cast<std::size_t>(panels));
  for (int i = 0; i < left; ++i)
    sizes.push_back(std::pow(grading, static_cast<double>(left - 1 - i)));
  for (int i = 0; i < right; ++i)
    sizes.push_back(std::pow(grading, static_cast<double>(i)));
  double total = 0.0;
  for (double s : sizes) total += s;
  std::vector<double> bp(1, 0.0);
  double acc = 0.0;
  for (double s : sizes) {
    acc += s / total;
    bp.push_back(acc);
  }
  bp.back() = 1.0;
  return bp;
}

ArcNodes build_arc_nodes(const Circle& c, const Arc& a, const QuadratureRule& r) {
  r.validate();
  const double span = arc_span(a);
  const auto bp = graded_breakpoints(r.panels_per_arc, r.endpoint_grading);
  std::vector<double> gx, gw;
  gauss_legendre(r.nodes_per_panel, gx, gw);
  ArcNodes out;
  const std::size_t total =
      static_cast<std::size_t>(r.panels_per_arc) * static_cast<std::size_t>(r.nodes_per_panel);
  out.theta.reserve(total);
  out.tau.reserve(total);
  out.w.reserve(total);
  for (int p = 0; p < r.panels_per_arc; ++p) {
    const double t0 = a.start_angle + span * bp[static_cast<std::size_t>(p)];
    const double t1 = a.start_angle + span * bp[static_cast<std::size_t>(p) + 1];
    const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
    for (int i = 0; i < r.nodes_per_panel; ++i) {
      const double th = mid + half * gx[static_cast<std::size_t>(i)];
      const Cx e = std::polar(1.0, th);
      out.theta.push_back(th);
      out.tau.push_back(c.center + c.radius * e);
      // dtau = i*rho*e^{i theta} dtheta
      out.w.push_back(Cx(0.0, 1.0) * c.radius * e * (half * gw[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

Cx integrate_arc(const Circle& c, const Arc& a, const QuadratureRule& r,
                 const std::function<Cx(Cx)>& f) {
  const ArcNodes n = build_arc_nodes(c, a, r);
  Cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < n.tau.size(); ++i) {
    const Cx v = f(n.tau[i]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "integrate_arc: non-finite sample on circle " << a.circle_index
         << " at angle " << n.theta[i];
      throw std::runtime_error(os.str());
    }
    acc += v * n.w[i];
  }
  return acc;
}

PathLeg segment_leg(Cx a, Cx b) {
  PathLeg leg;
  leg.point = [a, b](double s) { return a + s * (b - a); };
  leg.velocity = [a, b](double) { return b - a; };
  leg.length_hint = std::abs(b - a);
  return leg;
}

PathLeg circular_leg(Cx center, double radius, double theta0, double theta1) {
  PathLeg leg;
  leg.point = [=](double s) {
    return center + radius * std::polar(1.0, theta0 + s * (theta1 - theta0));
  };
  leg.velocity = [=](double s) {
    return Cx(0.0, 1.0) * (theta1 - theta0) * radius *
           std::polar(1.0, theta0 + s * (theta1 - theta0));
  };
  leg.length_hint = radius * std::abs(theta1 - theta0);
  return leg;
}

PathLeg reflected_leg(const Circle& c, const PathLeg& leg) {
  PathLeg out;
  const Cx ctr = c.center;
  const double r2 = c.radius * c.radius;
  auto p = leg.point;
  auto v = leg.velocity;
  out.point = [c, p](double s) { return reflect(c, p(s)); };
  out.velocity = [ctr, r2, p, v](double s) {
    const Cx d = std::conj(p(s) - ctr);
    return -r2 * std::conj(v(s)) / (d * d);
  };
  out.length_hint = leg.length_hint;  // rough
  return out;
}

Cx integrate_leg(const PathLeg& leg, int panels, int nodes,
                 const std::function<Cx(Cx)>& f) {
  std::vector<double> gx, gw;
  gauss_legendre(nodes, gx, gw);
  Cx acc{0.0, 0.0};
  for (int p = 0; p < panels; ++p) {
    const double s0 = static_cast<double>(p) / panels;
    const double s1 = static_cast<double>(p + 1) / panels;
    const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
    for (int i = 0; i < nodes; ++i) {
      const double s = mid + half * gx[static_cast<std::size_t>(i)];
      acc += f(leg.point(s)) * leg.velocity(s) * (half * gw[static_cast<std::size_t>(i)]);
    }
  }
  return acc;
}

Cx integrate_path(const std::vector<PathLeg>& legs, int panels, int nodes,
                  const std::function<Cx(Cx)>& f) {
  Cx acc{0.0, 0.0};
  for (const auto& leg : legs) acc += integrate_leg(leg, panels, nodes, f);
  return acc;
}

namespace {

void avoid_recurse(const DomainSpec& dom, Cx a, Cx b, double clear,
                   std::vector<Cx>& out, int depth) {
  if (depth > 12)
    throw std::runtime_error("avoiding_polyline: detour recursion too deep");
  for (const auto& c : dom.circles) {
    const double rr = c.radius * (1.0 + clear);
    const Cx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) continue;
    double s = ((c.center - a) * std::conj(ab)).real() / len2;
    if (s <= 1e-9 || s >= 1.0 - 1e-9) continue;  // nearest point at an endpoint
    const Cx closest = a + s * ab;
    double dist = std::abs(closest - c.center);
    if (dist >= rr) continue;
    // Detour waypoint pushed radially out of the inflated disk.
    Cx dir;
    if (dist < 1e-12 * c.radius) {
      dir = ab / std::sqrt(len2) * Cx(0.0, 1.0);  // perpendicular, arbitrary side
    } else {
      dir = (closest - c.center) / dist;
    }
    const Cx w = c.center + dir * (c.radius * (1.0 + 2.0 * clear));
    avoid_recurse(dom, a, w, clear, out, depth + 1);
    avoid_recurse(dom, w, b, clear, out, depth + 1);
    return;
  }
  out.push_back(b);
}

}  // namespace

std::vector<Cx> avoiding_polyline(const DomainSpec& dom, Cx from, Cx to,
                                  double clearance_factor) {
  std::vector<Cx> pts{from};
  avoid_recurse(dom, from, to, clearance_factor, pts, 0);
  return pts;
}

std::vector<PathLeg> polyline_legs(const std::vector<Cx>& waypoints) {
  std::vector<PathLeg> legs;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
    legs.push_back(segment_leg(waypoints[i], waypoints[i + 1]));
  return legs;
}

BoundaryGrid build_boundary_grid(const DomainSpec& dom,
                                 const std::vector<std::vector<Arc>>& arcs_per_circle,
                                 const QuadratureRule& rule) {
  if (arcs_per_circle.size() != dom.circles.size())
    throw std::invalid_argument("boundary grid: arcs per circle mismatch");
  BoundaryGrid grid;
  grid.domain = dom;
  grid.rule = rule;
  grid.arcs = arcs_per_circle;
  grid.arc_ranges.resize(dom.circles.size());
  // One-sided limits degrade when the target sits closer to an arc endpoint
  // than the endpoint panels can resolve; scale the guard band to the
  // innermost graded panel width instead of a fixed angle.
  {
    const auto bp = graded_breakpoints(rule.panels_per_arc, rule.endpoint_grading);
    double w_min = kTwoPi;
    for (const auto& arcs : arcs_per_circle)
      for (const Arc& a : arcs) w_min = std::min(w_min, arc_span(a) * bp[1]);
    grid.guard_angle = std::max(0.3 * w_min, 1e-6);
  }
  for (std::size_t nu = 0; nu < dom.circles.size(); ++nu) {
    double span = 0.0;
    for (std::size_t j = 0; j < arcs_per_circle[nu].size(); ++j) {
      const Arc& a = arcs_per_circle[nu][j];
      span += arc_span(a);
      const ArcNodes an = build_arc_nodes(dom.circles[nu], a, rule);
      const std::size_t first = grid.nodes.size();
      for (std::size_t i = 0; i < an.tau.size(); ++i) {
        grid.nodes.push_back({static_cast<int>(nu), static_cast<int>(j),
                              an.theta[i], an.tau[i], an.w[i]});
      }
      grid.arc_ranges[nu].push_back({first, an.tau.size()});
    }
    if (std::abs(span - kTwoPi) > 1e-9)
      throw std::invalid_argument("boundary grid: arcs do not cover a full circle");
  }
  return grid;
}

Cx cauchy_integral(const BoundaryGrid& grid, const std::function<Cx(Cx, Cx)>& kernel,
                   const std::vector<Cx>& density, Cx z) {
  Cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < grid.nodes.size(); ++i)
    acc += density[i] * kernel(z, grid.nodes[i].tau) * grid.nodes[i].w;
  return acc / Cx(0.0, kTwoPi);
}

namespace {

double angular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

Cx cauchy_boundary_limit(const BoundaryGrid& grid,
                         const std::function<Cx(Cx, Cx)>& kernel,
                         const std::vector<Cx>& density, int circle_index,
                         double theta_t, Cx g_t, Side side) {
  if (density.size() != grid.nodes.size())
    throw std::invalid_argument("cauchy_boundary_limit: density size mismatch");
  const Circle& c = grid.domain.circles.at(static_cast<std::size_t>(circle_index));
  for (const Arc& a : grid.arcs.at(static_cast<std::size_t>(circle_index))) {
    if (angular_distance(theta_t, a.start_angle) < grid.guard_angle ||
        angular_distance(theta_t, a.end_angle) < grid.guard_angle) {
      std::ostringstream os;
      os << "cauchy_boundary_limit: angle " << theta_t << " on circle "
         << circle_index << " is within the guard of an arc endpoint";
      throw std::runtime_error(os.str());
    }
  }
  const Cx t = c.point(theta_t);
  const double coincide_tol = 1e-10 * c.radius;
  Cx acc{0.0, 0.0};
  // PV of the bare Cauchy kernel over the full ccw circle is  pi*i.
  Cx pv = Cx(0.0, kPi);
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const auto& n = grid.nodes[i];
    if (n.circle == circle_index) {
      // Both subtracted integrands have removable singularities at tau = t;
      // when t lands exactly on a node, evaluate them at a neighboring node
      // instead (they are smooth there, error O(node spacing) on one weight).
      std::size_t j = i;
      if (std::abs(n.tau - t) < coincide_tol) {
        if (i + 1 < grid.nodes.size() && grid.nodes[i + 1].circle == circle_index)
          j = i + 1;
        else if (i > 0 && grid.nodes[i - 1].circle == circle_index)
          j = i - 1;
        else
          continue;
      }
      const Cx k = kernel(t, grid.nodes[j].tau);
      acc += (density[j] - g_t) * k * n.w;
      pv += (k - 1.0 / (grid.nodes[j].tau - t)) * n.w;
    } else {
      acc += density[i] * kernel(t, n.tau) * n.w;
    }
  }
  acc += g_t * pv;
  Cx out = acc / Cx(0.0, kTwoPi);
  // plus = left of ccw traversal = disk interior.
  out += (side == Side::plus ? 0.5 : -0.5) * g_t;
  return out;
}

Cx cauchy_offset_limit(const BoundaryGrid& grid,
                       const std::function<Cx(Cx, Cx)>& kernel,
                       const std::vector<Cx>& density, int circle_index,
                       double theta_t, Side side, double eps_rel) {
  const Circle& c = grid.domain.circles.at(static_cast<std::size_t>(circle_index));
  const Cx t = c.point(theta_t);
  const Cx normal = std::polar(1.0, theta_t);  // outward from the disk
  const double sgn = (side == Side::plus) ? -1.0 : 1.0;
  // Three-point Richardson extrapolation in eps -> 0 (error ~ C1 eps + C2 eps^2).
  const double e0 = eps_rel * c.radius;
  Cx f[3];
  for (int k = 0; k < 3; ++k) {
    const double e = e0 / std::pow(2.0, k);
    f[k] = cauchy_integral(grid, kernel, density, t + sgn * e * normal);
  }
  // Neville on (e0, e0/2, e0/4) at 0.
  Cx f01 = 2.0 * f[1] - f[0];
  Cx f12 = 2.0 * f[2] - f[1];
  return (4.0 * f12 - f01) / 3.0;
}

}  // namespace mch
