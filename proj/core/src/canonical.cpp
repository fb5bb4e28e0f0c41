#include "mch/canonical.hpp"

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

double angdist(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

// Deterministic interior probe: the bounding-box centroid, nudged into D.
Cx default_probe(const DomainSpec& dom) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : dom.circles) {
    xmin = std::min(xmin, c.center.real() - c.radius);
    xmax = std::max(xmax, c.center.real() + c.radius);
    ymin = std::min(ymin, c.center.imag() - c.radius);
    ymax = std::max(ymax, c.center.imag() + c.radius);
  }
  Cx z{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
  const double clear = 0.05 * dom.scale();
  const Cx step = 0.13 * dom.scale() * std::polar(1.0, 0.7);
  for (int k = 0; k < 400; ++k) {
    if (dom.in_domain(z, clear)) return z;
    z += step;
  }
  throw std::runtime_error("canonical: no interior probe point found");
}
}  // namespace

Cx ZeroPoleSchedule::star_point(const DomainSpec& dom, int nu, int j) const {
  return reflect(dom.circles[0],
                 circles.at(static_cast<std::size_t>(nu)).points.at(static_cast<std::size_t>(j)));
}

ZeroPoleSchedule choose_schedule(const DomainSpec& dom, const CoefficientField& field,
                                 const BranchData& branch, double margin) {
  ZeroPoleSchedule sched;
  sched.circles.resize(dom.size());
  std::vector<Cx> taken;
  for (std::size_t nu = 0; nu < dom.size(); ++nu) {
    const int kappa = branch.circles[nu].kappa;
    auto& entry = sched.circles[nu];
    entry.sign = (kappa > 0) - (kappa < 0);
    if (kappa == 0) continue;
    const int n = std::abs(kappa);
    const Circle& circ = dom.circles[nu];
    const double theta1 = field.circles[nu].marked_angles.at(0);

    double m = margin;
    bool placed = false;
    while (m >= 0.05 - 1e-12 && !placed) {
      // Points on the mid-collar, hooks (arcs) further out but inside the
      // collar of width m; everything must clear the other disks.
      const double r_pt = circ.radius * (1.0 + 0.5 * m);
      // Angle offset maximizing the distance to the marked points.
      double best_off = 0.0, best_sep = -1.0;
      for (int s = 0; s < 32; ++s) {
        const double off = kTwoPi * s / (32.0 * (n + 1));
        double sep = 1e300;
        for (int j = 0; j < n; ++j) {
          const double phi = theta1 + kTwoPi * (j + 1) / (n + 1) + off;
          for (double ma : field.circles[nu].marked_angles)
            sep = std::min(sep, angdist(phi, ma));
        }
        if (sep > best_sep) {
          best_sep = sep;
          best_off = off;
        }
      }
      // Validate the whole collar annulus against the rest of the geometry.
      bool ok = true;
      for (int s = 0; s < 256 && ok; ++s) {
        const Cx w = circ.center + circ.radius * (1.0 + m) * std::polar(1.0, kTwoPi * s / 256.0);
        for (std::size_t k = 0; k < dom.size() && ok; ++k)
          if (k != nu && dom.circles[k].distance(w) < 0.02 * dom.circles[k].radius) ok = false;
      }
      if (ok) {
        for (int j = 0; j < n && ok; ++j) {
          const Cx zj = circ.center + r_pt * std::polar(1.0, theta1 + kTwoPi * (j + 1) / (n + 1) + best_off);
          for (Cx t : taken)
            if (std::abs(zj - t) < 1e-9 * dom.scale()) ok = false;
        }
      }
      if (!ok) {
        m *= 0.7;
        continue;
      }
      for (int j = 0; j < n; ++j) {
        const double phi = theta1 + kTwoPi * (j + 1) / (n + 1) + best_off;
        const Cx zj = circ.center + r_pt * std::polar(1.0, phi);
        // Hook path: radial launch from t_nu1 to the hook radius, collar
        // arc to the point's angle, inward drop onto the point. Hook radii
        // decrease with j so the paths never cross.
        const double q = circ.radius * (1.0 + m * (0.55 + 0.4 * (n - j) / static_cast<double>(n + 1)));
        std::vector<PathLeg> path;
        const Cx launch = circ.center + q * std::polar(1.0, theta1);
        path.push_back(segment_leg(circ.point(theta1), launch));
        path.push_back(circular_leg(circ.center, q, theta1, phi));
        path.push_back(segment_leg(circ.center + q * std::polar(1.0, phi), zj));
        entry.points.push_back(zj);
        entry.paths.push_back(std::move(path));
        taken.push_back(zj);
      }
      placed = true;
    }
    if (!placed) {
      std::ostringstream os;
      os << "choose_schedule: no admissible zero/pole placement near circle " << nu;
      throw std::runtime_error(os.str());
    }
  }
  return sched;
}

// ---------------------------------------------------------------------------
// Gamma

Cx GammaFunction::path_term(Cx z) const {
  Cx sum{0.0, 0.0};
  for (const auto& entry : schedule.circles) {
    for (const auto& path : entry.paths) {
      const Cx val = integrate_path(path, path_panels, path_nodes,
                                    [&](Cx tau) { return eval_K(*ctx, z, tau); });
      sum += static_cast<double>(entry.sign) * val;
    }
  }
  return sum;
}

Cx GammaFunction::operator()(Cx z) const {
  const Cx base = cauchy_integral(
      grid, [&](Cx zz, Cx tau) { return eval_K(*ctx, zz, tau); }, density, z);
  return base + path_term(z);
}

Cx GammaFunction::boundary(int circle, double theta, bool domain_side) const {
  const auto& part = field.circles.at(static_cast<std::size_t>(circle));
  const int arc = part.arc_containing(theta);
  const Cx g_t = Cx{0.0, -0.5} * argp_value(field, branch, circle, arc, theta);
  const Side side = domain_side ? Side::minus : Side::plus;
  const Cx base = cauchy_boundary_limit(
      grid, [&](Cx zz, Cx tau) { return eval_K(*ctx, zz, tau); }, density, circle,
      theta, g_t, side);
  return base + path_term(domain.circles[static_cast<std::size_t>(circle)].point(theta));
}

GammaFunction build_gamma(const KernelContext& ctx, const DomainSpec& dom,
                          const CoefficientField& field, const BranchData& branch,
                          const ZeroPoleSchedule& schedule, const QuadratureRule& rule) {
  if (!ctx.prepared()) throw std::logic_error("build_gamma: kernel context not prepared");
  GammaFunction g;
  g.ctx = &ctx;
  g.domain = dom;
  g.field = field;
  g.branch = branch;
  g.schedule = schedule;
  g.grid = build_boundary_grid(dom, field.ccw_arcs(), rule);
  g.density.reserve(g.grid.size());
  for (const auto& node : g.grid.nodes)
    g.density.push_back(Cx{0.0, -0.5} *
                        argp_value(field, branch, node.circle, node.arc, node.theta));
  return g;
}

// ---------------------------------------------------------------------------
// Product evaluator

struct CanonicalFunction::ProductState {
  struct Factor {
    Cx point;
    double coeff;  // exponent of (z - point)
  };
  DomainSpec domain;
  CoefficientField field;
  std::vector<Factor> factors;
  Cx const_log{0.0, 0.0};  // z-independent part (principal logs)
  Cx z_ref;
  Cx log_ref{0.0, 0.0};  // continued log of the product at z_ref
  Cx norm_log{0.0, 0.0};  // subtracted to symmetrize (records the constant)

  mutable std::mutex mu;
  // Per (circle, arc): previously continued boundary anchors (theta, log),
  // reused so neighboring nodes need only a short continuation.
  mutable std::map<std::pair<int, int>, std::vector<std::pair<double, Cx>>> arc_anchors;

  // Principal-ratio log increment of one factor along [a, b], subdividing
  // until each step is short relative to the distance to the branch point.
  static Cx ratio_log(Cx w, Cx a, Cx b, int depth) {
    const double da = std::abs(a - w), db = std::abs(b - w);
    if (std::abs(b - a) < 0.8 * std::min(da, db))
      return std::log((b - w) / (a - w));
    if (depth > 48)
      throw std::runtime_error("canonical product: continuation path hits a branch point");
    const Cx mid = 0.5 * (a + b);
    return ratio_log(w, a, mid, depth + 1) + ratio_log(w, mid, b, depth + 1);
  }

  Cx increment(Cx a, Cx b) const {
    Cx sum{0.0, 0.0};
    for (const auto& f : factors) sum += f.coeff * ratio_log(f.point, a, b, 0);
    return sum;
  }

  Cx continue_along(const std::vector<Cx>& pts, Cx log0) const {
    Cx cur = log0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) cur += increment(pts[i], pts[i + 1]);
    return cur;
  }

  // Continued log from the reference point through D.
  Cx log_at(Cx z) const {
    if (std::abs(z - z_ref) < 1e-14) return log_ref - norm_log;
    const auto way = avoiding_polyline(domain, z_ref, z);
    return continue_along(way, log_ref) - norm_log;
  }

  // Boundary point on (circle, theta), anchored per arc for speed.
  Cx log_on_boundary(int circle, double theta) const {
    const auto& part = field.circles.at(static_cast<std::size_t>(circle));
    const int arc = part.arc_containing(theta);
    const Circle& circ = domain.circles[static_cast<std::size_t>(circle)];
    const Cx t = circ.point(theta);
    std::lock_guard<std::mutex> lock(mu);
    auto& anchors = arc_anchors[{circle, arc}];
    const std::pair<double, Cx>* best = nullptr;
    double best_d = 1e300;
    for (const auto& a : anchors) {
      const double d = angdist(a.first, theta);
      if (d < best_d) {
        best_d = d;
        best = &a;
      }
    }
    Cx lg;
    if (!best) {
      lg = continue_along(avoiding_polyline(domain, z_ref, t), log_ref);
    } else {
      // Walk along the circle from the anchor, lifted slightly off the disk;
      // all intermediate chords stay within the arc's angular range.
      const double lift = 1.0 + 0.04;
      double a0 = best->first;
      // shortest angular route within the arc (no marked point between two
      // points of the same arc, so either direction is equivalent; take the
      // short one)
      double d = theta - a0;
      while (d > kPi) d -= kTwoPi;
      while (d < -kPi) d += kTwoPi;
      const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(d) / 0.1)));
      std::vector<Cx> pts;
      pts.push_back(circ.point(a0));
      for (int s = 1; s < steps; ++s)
        pts.push_back(circ.center +
                      circ.radius * lift * std::polar(1.0, a0 + d * s / steps));
      pts.push_back(t);
      lg = continue_along(pts, best->second);
    }
    if (anchors.size() < 64) anchors.push_back({theta, lg});
    return lg - norm_log;
  }
};

// ---------------------------------------------------------------------------
// CanonicalFunction

Cx CanonicalFunction::value(Cx z) const {
  if (mode == CanonicalMode::quadrature) {
    const Cx zt = reflect(domain.circles[0], z);
    return std::exp((*gamma_)(z) + std::conj((*gamma_)(zt)));
  }
  if (!domain.in_domain(z, -1e-12 * domain.scale()))
    throw std::invalid_argument("canonical product: evaluation point outside closure(D)");
  return std::exp(product_->log_at(z));
}

Cx CanonicalFunction::boundary_plus(int circle, double theta) const {
  if (mode == CanonicalMode::quadrature) {
    const Cx gp = gamma_->boundary(circle, theta, true);
    const Cx gm = gamma_->boundary(circle, theta, false);
    return std::exp(gp + std::conj(gm) - std::conj(h.at(static_cast<std::size_t>(circle))));
  }
  return std::exp(product_->log_on_boundary(circle, theta));
}

Cx CanonicalFunction::boundary_minus(int circle, double theta) const {
  return std::conj(boundary_plus(circle, theta)) /
         characters.H.at(static_cast<std::size_t>(circle));
}

const GammaFunction& CanonicalFunction::gamma() const {
  if (!gamma_) throw std::logic_error("canonical: no quadrature data in product mode");
  return *gamma_;
}

CanonicalFunction build_chi(const KernelContext& ctx, const DomainSpec& dom,
                            const CoefficientField& field, const BranchData& branch,
                            const ZeroPoleSchedule& schedule, const QuadratureRule& rule) {
  CanonicalFunction chi;
  chi.mode = CanonicalMode::quadrature;
  chi.ctx = &ctx;
  chi.domain = dom;
  chi.gamma_ = std::make_shared<GammaFunction>(
      build_gamma(ctx, dom, field, branch, schedule, rule));
  chi.h.assign(dom.size(), Cx{0.0, 0.0});
  for (std::size_t nu = 1; nu < dom.size(); ++nu) {
    const MobiusMap sig = generator_map(dom, static_cast<int>(nu));
    chi.h[nu] = (*chi.gamma_)(sig(infinity_point()));
  }
  // Characters from the defect ratio at the probe point; the quadrature
  // construction is defined on both sides of L, so the generator images
  // (inside the disks) are directly evaluable.
  chi.probe_point = default_probe(dom);
  chi.characters.H.assign(dom.size(), Cx{1.0, 0.0});
  const Cx chi_probe = chi.value(chi.probe_point);
  for (std::size_t nu = 1; nu < dom.size(); ++nu) {
    const MobiusMap sig = generator_map(dom, static_cast<int>(nu));
    Cx H = chi_probe / chi.value(sig(chi.probe_point));
    chi.characters.H[nu] = H / std::abs(H);
  }
  // By construction chi(z) = conj(chi(T0 z)) exactly.
  chi.symmetry_constant = std::conj(chi.value(reflect(dom.circles[0], chi.probe_point))) / chi_probe;
  return chi;
}

CanonicalFunction build_pi(const KernelContext& ctx, const DomainSpec& dom,
                           const CoefficientField& field, const BranchData& branch,
                           const ZeroPoleSchedule& schedule) {
  if (!ctx.group) throw std::logic_error("build_pi: kernel context without a group");
  CanonicalFunction chi;
  chi.mode = CanonicalMode::product;
  chi.ctx = &ctx;
  chi.domain = dom;
  auto st = std::make_shared<CanonicalFunction::ProductState>();
  st->domain = dom;
  st->field = field;
  const Cx d0 = dom.circles[0].center;

  // Marked-point data (piecewise-constant coefficients only).
  for (const auto& part : field.circles)
    for (const auto& arc : part.arcs)
      if (!arc.is_constant())
        throw std::invalid_argument("build_pi: coefficients must be piecewise constant");

  for (const auto& el : ctx.group->elements) {
    for (std::size_t nu = 0; nu < dom.size(); ++nu) {
      const auto& part = field.circles[nu];
      const auto& cb = branch.circles[nu];
      for (int j = 0; j < part.m(); ++j) {
        const Cx w = el.map(dom.circles[nu].point(part.marked_angles[static_cast<std::size_t>(j)]));
        const double a = cb.alpha[static_cast<std::size_t>(j)];
        st->factors.push_back({w, 2.0 * a});
        st->const_log -= a * std::log(d0 - w);
      }
      const auto& entry = schedule.circles[nu];
      for (std::size_t j = 0; j < entry.points.size(); ++j) {
        const Cx w1 = el.map(entry.points[j]);
        const Cx w2 = el.map(schedule.star_point(dom, static_cast<int>(nu), static_cast<int>(j)));
        const double s = entry.sign;
        st->factors.push_back({w1, s});
        st->factors.push_back({w2, s});
        st->const_log -= s * std::log(d0 - w2);
      }
    }
  }

  // Far reference point, principal logs there fix the overall branch (a
  // unimodular constant, normalized away below).
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : dom.circles) {
    xmin = std::min(xmin, c.center.real() - c.radius);
    xmax = std::max(xmax, c.center.real() + c.radius);
    ymin = std::min(ymin, c.center.imag() - c.radius);
    ymax = std::max(ymax, c.center.imag() + c.radius);
  }
  const double R = std::max(xmax - xmin, ymax - ymin) + dom.scale();
  st->z_ref = Cx{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)} + 4.0 * R * std::polar(1.0, kPi / 4.0);
  st->log_ref = st->const_log;
  for (const auto& f : st->factors) st->log_ref += f.coeff * std::log(st->z_ref - f.point);
  chi.product_ = st;

  // Symmetrize: on the distinguished circle the character is 1, so the
  // boundary ratio there measures the square of the stray constant.
  auto ratio_at = [&](int nu, double theta) {
    Cx p, q;
    field.p_q(nu, theta, p, q);
    const Cx cp = std::exp(st->log_on_boundary(nu, theta));
    return p * std::conj(cp) / cp;
  };
  const auto& part0 = field.circles[0];
  const double mid0 = part0.marked_angles[0] - 0.5 * part0.gap(0);
  const Cx c2 = 1.0 / ratio_at(0, mid0);
  st->norm_log = 0.5 * std::log(c2);  // divides the product by sqrt(c2)
  chi.symmetry_constant = std::exp(st->norm_log);

  // Characters from the boundary ratio (branch-free; equivalent to the
  // probe-ratio extraction once the product is symmetrized).
  chi.probe_point = default_probe(dom);
  chi.characters.H.assign(dom.size(), Cx{1.0, 0.0});
  for (std::size_t nu = 1; nu < dom.size(); ++nu) {
    const auto& part = field.circles[nu];
    // widest arc midpoint
    int jb = 0;
    for (int j = 1; j < part.m(); ++j)
      if (part.gap(j) > part.gap(jb)) jb = j;
    const double mid = part.marked_angles[static_cast<std::size_t>(jb)] - 0.5 * part.gap(jb);
    Cx H = ratio_at(static_cast<int>(nu), mid);
    chi.characters.H[nu] = H / std::abs(H);
  }
  chi.h.assign(dom.size(), Cx{0.0, 0.0});
  for (std::size_t nu = 1; nu < dom.size(); ++nu)
    chi.h[nu] = Cx{0.0, 0.5} * std::log(chi.characters.H[nu]);  // Im h mod pi
  return chi;
}

}  // namespace mch
