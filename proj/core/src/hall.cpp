#include "mch/hall.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mch {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double mod_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

double wrapped_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

// Continued arg of the piecewise-constant factor on arc j (0-based),
// constant per arc, following the winding convention of the tables.
double table_argp(const HallPlateSpec& spec, int arc) {
  const double delta = 2.0 * std::atan(spec.resistivity / std::abs(spec.hall));
  const int j = arc + 1;  // 1-based marked-point index of the arc start
  if (spec.hall > 0.0) return (j % 2 == 1) ? delta + (j - 1) * kPi : j * kPi;
  return (j % 2 == 1) ? -delta + (j - 1) * kPi : (j - 2) * kPi;
}

// Exponent alpha at marked point j (1-based) of a circle with n electrodes.
double table_alpha(const HallPlateSpec& spec, int n, int j) {
  const int kappa = n / 2 + 1;
  if (j == 1) {
    // shifted closure: (argp_{2n} - argp_1 + 2 pi) / (4 pi) - kappa
    const double diff = table_argp(spec, 2 * n - 1) - table_argp(spec, 0);
    return (diff + kTwoPi) / (2.0 * kTwoPi) - kappa;
  }
  const double jump = table_argp(spec, j - 2) - table_argp(spec, j - 1);
  return jump / (2.0 * kTwoPi);
}

// chi^+ at signed angular distance u from marked point jm (sign > 0 is ccw).
// Inside the guard band chi^+ = |t - t_m|^(2 alpha) * (smooth factor); the
// smooth factor is extrapolated quadratically from three reference angles
// just outside the band. u may be far below the resolution of theta itself.
Cx chi_plus_near(const CanonicalFunction& chi, const CoefficientField& field,
                 int circle, int jm, double sign, double u_in) {
  const GammaFunction& gamma = *chi.gamma_;
  const double guard = 1.2 * gamma.grid.guard_angle;
  const CirclePartition& part = field.circles.at(static_cast<std::size_t>(circle));
  const double theta_m = part.marked_angles[static_cast<std::size_t>(jm)];
  if (u_in >= guard) return chi.boundary_plus(circle, theta_m + sign * u_in);
  const Circle& c = gamma.domain.circles.at(static_cast<std::size_t>(circle));
  const Cx tm = c.point(theta_m);
  const double alpha = gamma.branch.circles.at(static_cast<std::size_t>(circle))
                           .alpha.at(static_cast<std::size_t>(jm));
  const double span = std::min(part.gap(jm), part.gap((jm + part.m() - 1) % part.m()));
  // reference scale tied to the arc span, not to the guard: with fine rules
  // the guard shrinks below what the one-sided limits resolve near the kink
  double step = std::max(guard, 0.004 * span);
  if (3.6 * step > 0.45 * span) step = 0.45 * span / 3.6;
  const double u[3] = {1.5 * step, 2.5 * step, 3.5 * step};
  Cx f[3];
  for (int k = 0; k < 3; ++k) {
    const double th = theta_m + sign * u[k];
    f[k] = chi.boundary_plus(circle, th) /
           std::pow(std::abs(c.point(th) - tm), 2.0 * alpha);
  }
  Cx fq{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    double lk = 1.0;
    for (int i = 0; i < 3; ++i)
      if (i != k) lk *= (u_in - u[i]) / (u[k] - u[i]);
    fq += lk * f[k];
  }
  // chord distance, stable for u far below the angle resolution
  const double chord = 2.0 * c.radius * std::sin(0.5 * u_in);
  return fq * std::pow(chord, 2.0 * alpha);
}

// chi^+ at an arbitrary boundary angle with a power-law carry across the
// guard bands around the marked points (same idea as the general solver).
Cx chi_plus_robust(const CanonicalFunction& chi, const CoefficientField& field,
                   int circle, double theta) {
  if (chi.mode == CanonicalMode::product || !chi.gamma_)
    return chi.boundary_plus(circle, theta);
  const GammaFunction& gamma = *chi.gamma_;
  const double guard = 1.2 * gamma.grid.guard_angle;
  const CirclePartition& part = field.circles.at(static_cast<std::size_t>(circle));
  int jm = -1;
  double best = guard;
  for (int j = 0; j < part.m(); ++j) {
    const double d = wrapped_distance(theta, part.marked_angles[static_cast<std::size_t>(j)]);
    if (d < best) {
      best = d;
      jm = j;
    }
  }
  if (jm < 0) return chi.boundary_plus(circle, theta);
  const double theta_m = part.marked_angles[static_cast<std::size_t>(jm)];
  double delta = std::remainder(theta - theta_m, kTwoPi);
  if (delta == 0.0) delta = 1e-14;
  return chi_plus_near(chi, field, circle, jm, delta >= 0.0 ? 1.0 : -1.0,
                       std::abs(delta));
}

Cx principal_half(Cx H) { return std::sqrt(H); }

// Index of the marked point sitting at `angle` (arc endpoints always are).
int marked_index_at(const CirclePartition& part, double angle) {
  for (int j = 0; j < part.m(); ++j)
    if (wrapped_distance(angle, part.marked_angles[static_cast<std::size_t>(j)]) < 1e-9)
      return j;
  throw std::logic_error("hall: arc endpoint is not a marked point");
}

// Quadrature for electrode-arc integrals of chi^+ times a smooth factor.
// The substitution theta(s) vanishes to order 8 at both arc ends, so the
// power-law endpoint behavior |t - t_m|^(2 alpha) with 2 alpha > -1 turns
// into a smooth integrand in s and plain Gauss-Legendre panels converge
// fast. (Plain graded panels leave an O(1e-3) tail for exponent -3/4.)
// The angular distance to the nearer arc end is kept separately: the inner
// nodes get closer to the ends than the resolution of theta itself.
struct ElectrodeNodes {
  std::vector<double> theta;
  std::vector<Cx> tau;
  std::vector<Cx> w;    // complex ccw weights, sum f(tau_i) w_i ~ arc integral
  std::vector<double> dist;  // angular distance to the nearer arc end
  std::vector<int> end;      // 0: nearer to start_angle, 1: nearer to end_angle
};

ElectrodeNodes electrode_arc_nodes(const Circle& c, const Arc& a, const QuadratureRule& r) {
  const double span = arc_span(a);
  // q(x) = int_0^x (t(2-t))^7 dt = x^8 sum_k C(7,k) 2^(7-k) (-x)^k / (8+k),
  // so that 1 + P(s) = q(1+s)/q(1) with P the order-8 endpoint-flat map
  const auto q = [](double x) {
    double sum = 0.0;
    double binom = 128.0;  // C(7,k) 2^(7-k) (-1)^k, starting at k = 0
    double xk = 1.0;
    for (int k = 0; k <= 7; ++k) {
      sum += binom * xk / (8 + k);
      xk *= x;
      binom *= -(7.0 - k) / (2.0 * (k + 1.0));
    }
    return std::pow(x, 8) * sum;
  };
  const auto dq = [](double x) { return std::pow(x * (2.0 - x), 7); };
  const double C = q(1.0);
  std::vector<double> gl_x, gl_w;
  gauss_legendre(r.nodes_per_panel, gl_x, gl_w);
  ElectrodeNodes out;
  const int panels = r.panels_per_arc;
  for (int p = 0; p < panels; ++p) {
    const double s0 = -1.0 + 2.0 * p / panels;
    const double s1 = -1.0 + 2.0 * (p + 1) / panels;
    for (int i = 0; i < r.nodes_per_panel; ++i) {
      const double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * gl_x[static_cast<std::size_t>(i)];
      const double ds = 0.5 * (s1 - s0) * gl_w[static_cast<std::size_t>(i)];
      const int side = (s < 0.0) ? 0 : 1;
      const double x = (side == 0) ? 1.0 + s : 1.0 - s;
      const double u = 0.5 * span * q(x) / C;     // distance to the near end
      const double dtheta = 0.5 * span * dq(x) / C * ds;
      const double theta = (side == 0) ? a.start_angle + u : a.start_angle + span - u;
      out.theta.push_back(theta);
      out.tau.push_back(c.point(theta));
      out.w.push_back(Cx{0.0, 1.0} * c.radius * std::polar(1.0, theta) * dtheta);
      out.dist.push_back(u);
      out.end.push_back(side);
    }
  }
  return out;
}
}  // namespace

// ---------------------------------------------------------------------------
// Spec

void HallPlateSpec::validate() const {
  domain.validate();
  if (circles.size() != domain.size())
    throw std::invalid_argument("hall: one electrode layout per circle required");
  if (!(thickness > 0.0)) throw std::invalid_argument("hall: thickness must be positive");
  if (!(resistivity > 0.0)) throw std::invalid_argument("hall: resistivity must be positive");
  if (hall == 0.0)
    throw std::invalid_argument("hall: zero Hall parameter not supported (no Hall effect)");
  double total = 0.0, scale = 0.0;
  bool seen_odd = false;
  for (std::size_t nu = 0; nu < circles.size(); ++nu) {
    const auto& ce = circles[nu];
    const int n = ce.electrode_count();
    if (n < 1) throw std::invalid_argument("hall: every circle needs an electrode");
    if (ce.marked_angles.size() != static_cast<std::size_t>(2 * n))
      throw std::invalid_argument("hall: marked angles must pair up with electrodes");
    if (n % 2 == 1) seen_odd = true;
    else if (seen_odd)
      throw std::invalid_argument("hall: circles with an even electrode count must precede the odd ones");
    // clockwise order with nondegenerate arcs: the clockwise gaps from each
    // marked point to the next must be positive and sum to one turn.
    double turn = 0.0;
    for (std::size_t j = 0; j < ce.marked_angles.size(); ++j) {
      const std::size_t k = (j + 1) % ce.marked_angles.size();
      const double gap = mod_2pi(ce.marked_angles[j] - ce.marked_angles[k]);
      if (gap < 1e-9)
        throw std::invalid_argument("hall: degenerate boundary arc");
      turn += gap;
    }
    if (std::abs(turn - kTwoPi) > 1e-9)
      throw std::invalid_argument("hall: marked angles are not in clockwise order");
    for (double J : ce.currents) {
      total += J;
      scale = std::max(scale, std::abs(J));
    }
  }
  if (std::abs(total) > 1e-12 * std::max(scale, 1.0))
    throw std::invalid_argument("hall: electrode currents must sum to zero");
}

int HallPlateSpec::electrodes_on(int nu) const {
  return circles.at(static_cast<std::size_t>(nu)).electrode_count();
}

int HallPlateSpec::last_even_circle() const {
  int n0 = -1;
  for (std::size_t nu = 0; nu < circles.size(); ++nu)
    if (circles[nu].electrode_count() % 2 == 0) n0 = static_cast<int>(nu);
  return n0;
}

int HallPlateSpec::total_electrodes() const {
  int n = 0;
  for (const auto& ce : circles) n += ce.electrode_count();
  return n;
}

int HallPlateSpec::s_total() const {
  int s = 0;
  for (const auto& ce : circles) s += (ce.electrode_count() + 1) / 2;
  return s;
}

// ---------------------------------------------------------------------------
// Coefficients

CoefficientField build_coefficients(const HallPlateSpec& spec) {
  spec.validate();
  const double al = spec.resistivity, be = spec.hall;
  CoefficientField field;
  field.circles.resize(spec.circles.size());
  for (std::size_t nu = 0; nu < spec.circles.size(); ++nu) {
    auto& part = field.circles[nu];
    part.marked_angles = spec.circles[nu].marked_angles;
    part.arcs.resize(part.marked_angles.size());
    for (std::size_t j = 0; j < part.arcs.size(); ++j) {
      auto& arc = part.arcs[j];
      if (j % 2 == 0) {
        // electrode: tangential electric field vanishes
        arc.fa = [al, be](double th) { return al * std::sin(th) + be * std::cos(th); };
        arc.fb = [al, be](double th) { return al * std::cos(th) - be * std::sin(th); };
      } else {
        // dielectric: normal current vanishes
        arc.fa = [](double th) { return std::cos(th); };
        arc.fb = [](double th) { return -std::sin(th); };
      }
      arc.fc = [](double) { return 0.0; };
    }
  }
  return field;
}

CoefficientField jump_coefficients(const HallPlateSpec& spec) {
  spec.validate();
  CoefficientField field;
  field.circles.resize(spec.circles.size());
  for (std::size_t nu = 0; nu < spec.circles.size(); ++nu) {
    auto& part = field.circles[nu];
    part.marked_angles = spec.circles[nu].marked_angles;
    part.arcs.resize(part.marked_angles.size());
    for (std::size_t j = 0; j < part.arcs.size(); ++j) {
      auto& arc = part.arcs[j];
      if (j % 2 == 0) {
        arc.a = spec.resistivity;
        arc.b = -spec.hall;
      } else {
        arc.a = 0.0;
        arc.b = 1.0;
      }
      arc.c = 0.0;
    }
  }
  return field;
}

// ---------------------------------------------------------------------------
// Winding tables

BranchData hall_parameters(const HallPlateSpec& spec) {
  spec.validate();
  BranchData out;
  out.samples_per_arc = 2;
  out.circles.resize(spec.circles.size());
  for (std::size_t nu = 0; nu < spec.circles.size(); ++nu) {
    const int n = spec.circles[nu].electrode_count();
    const int m = 2 * n;
    CircleBranch& cb = out.circles[nu];
    cb.kappa = n / 2 + 1;
    cb.alpha.resize(static_cast<std::size_t>(m));
    cb.argp_start.resize(static_cast<std::size_t>(m));
    cb.argp_end.resize(static_cast<std::size_t>(m));
    cb.sample_argp.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const double v = table_argp(spec, j);
      cb.argp_start[static_cast<std::size_t>(j)] = v;
      cb.argp_end[static_cast<std::size_t>(j)] = v;
      cb.sample_argp[static_cast<std::size_t>(j)] = {v, v};
      cb.alpha[static_cast<std::size_t>(j)] = table_alpha(spec, n, j + 1);
    }
    cb.l = (cb.alpha[0] <= -0.5 + 1e-9 && cb.alpha[0] > -1.0) ? 1 : 0;
  }
  return out;
}

BranchData combined_branch(const HallPlateSpec& spec, const CoefficientField& field) {
  // The combined factorization data is the numeric unwrapping of the full
  // field. It agrees with the closed tables up to whole turns: every exponent
  // equals the table value plus 1/2 at the first marked point (the first
  // factor's simple zero) modulo an integer, and the per-circle sum of the
  // exponents plus the winding is 1 for every circle.
  BranchData ub = unwrap_branches(spec.domain, field);
  const BranchData tables = hall_parameters(spec);
  for (std::size_t nu = 0; nu < ub.circles.size(); ++nu) {
    const CircleBranch& cb = ub.circles[nu];
    const CircleBranch& tb = tables.circles[nu];
    double gamma = static_cast<double>(cb.kappa);
    for (std::size_t j = 0; j < cb.alpha.size(); ++j) {
      gamma += cb.alpha[j];
      const double target = tb.alpha[j] + (j == 0 ? 0.5 : 0.0);
      const double d = target - cb.alpha[j];
      if (std::abs(d - std::round(d)) > 1e-6) {
        std::ostringstream os;
        os << "hall: unwrapped exponent " << cb.alpha[j] << " at circle " << nu
           << " point " << j + 1 << " is incompatible with the table value " << target;
        throw std::runtime_error(os.str());
      }
    }
    if (std::abs(gamma - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "hall: circle " << nu << " has exponent sum " << gamma
         << ", expected 1 (degenerate coefficient data?)";
      throw std::runtime_error(os.str());
    }
  }
  return ub;
}

// ---------------------------------------------------------------------------
// chi1

Cx HallChi1::gamma1(Cx z) const {
  return -cauchy_integral(
      grid, [&](Cx zz, Cx tau) { return eval_K(*ctx, zz, tau); }, density, z);
}

Cx HallChi1::value(Cx z) const {
  const Cx zt = reflect(domain.circles[0], z);
  return std::exp(0.5 * (gamma1(z) + std::conj(gamma1(zt))));
}

Cx HallChi1::boundary_plus(int circle, double theta) const {
  const std::size_t nu = static_cast<std::size_t>(circle);
  const double tilde = anchor[nu] - mod_2pi(anchor[nu] - theta);
  const Cx g_t{0.0, -tilde};
  auto kernel = [&](Cx zz, Cx tau) { return eval_K(*ctx, zz, tau); };
  const Cx gp = -cauchy_boundary_limit(grid, kernel, density, circle, theta, g_t, Side::minus);
  Cx gr;  // Gamma1 at the reflected point
  if (circle == 0) {
    gr = -cauchy_boundary_limit(grid, kernel, density, circle, theta, g_t, Side::plus);
  } else {
    gr = gamma1(reflect(domain.circles[0], domain.circles[nu].point(theta)));
  }
  return std::exp(0.5 * (gp + std::conj(gr)));
}

HallChi1 build_chi1(const KernelContext& ctx, const HallPlateSpec& spec,
                    const QuadratureRule& rule) {
  if (!ctx.prepared()) throw std::logic_error("build_chi1: kernel context not prepared");
  spec.validate();
  HallChi1 chi;
  chi.ctx = &ctx;
  chi.domain = spec.domain;
  const CoefficientField field = jump_coefficients(spec);
  chi.grid = build_boundary_grid(spec.domain, field.ccw_arcs(), rule);
  chi.anchor.resize(spec.circles.size());
  for (std::size_t nu = 0; nu < spec.circles.size(); ++nu)
    chi.anchor[nu] = spec.circles[nu].marked_angles[0];
  chi.density.reserve(chi.grid.size());
  for (const auto& node : chi.grid.nodes) {
    // ln(rho/(tau-delta)) = -i * (angle continued across the cut at t_nu1)
    const double tilde = chi.anchor[static_cast<std::size_t>(node.circle)] -
                         mod_2pi(chi.anchor[static_cast<std::size_t>(node.circle)] - node.theta);
    chi.density.push_back(Cx{0.0, -tilde});
  }
  // factors from the defect ratio at an interior probe
  chi.H1.assign(spec.domain.size(), Cx{1.0, 0.0});
  Cx probe{0.0, 0.0};
  {
    // reuse the far reference trick: a point well inside D
    double best = -1.0;
    for (int s = 0; s < 64; ++s) {
      const Cx cand = spec.domain.circles[0].center +
                      spec.domain.circles[0].radius * 3.0 * std::polar(1.0, kTwoPi * s / 64.0);
      double clear = 1e300;
      for (const auto& c : spec.domain.circles) clear = std::min(clear, c.distance(cand));
      if (clear > best) {
        best = clear;
        probe = cand;
      }
    }
  }
  const Cx vp = chi.value(probe);
  for (std::size_t nu = 1; nu < spec.domain.size(); ++nu) {
    const MobiusMap sig = generator_map(spec.domain, static_cast<int>(nu));
    const Cx H = vp / chi.value(sig(probe));
    chi.H1[nu] = H / std::abs(H);
  }
  return chi;
}

std::vector<Cx> chi1_factor_series(const KernelContext& ctx, const HallPlateSpec& spec) {
  const DomainSpec& dom = spec.domain;
  // Single-circle potential of the density ln(rho_j / (tau - delta_j)):
  // ln((a - t_j1)/(a - delta_j)) outside disk j, ln((a - t_j1)/rho_j) inside.
  auto potential = [&](std::size_t j, Cx a) -> Cx {
    if (is_infinite(a)) return {0.0, 0.0};
    const Circle& c = dom.circles[j];
    const Cx tj1 = c.point(spec.circles[j].marked_angles[0]);
    if (c.strictly_inside(a)) return std::log((a - tj1) / c.radius);
    return std::log((a - tj1) / (a - c.center));
  };
  std::vector<Cx> out(dom.size(), Cx{1.0, 0.0});
  for (std::size_t nu = 1; nu < dom.size(); ++nu) {
    // h_nu = Gamma1(w_nu) as the group-orbit sum of the per-circle potentials
    const Cx w = generator_map(dom, static_cast<int>(nu))(infinity_point());
    Cx h{0.0, 0.0};
    for (std::size_t j = 0; j < dom.size(); ++j)
      for (const auto& el : ctx.group->elements)
        h += potential(j, el.map(w)) - potential(j, el.map(infinity_point()));
    // principal logs leave the imaginary part determined mod 2 pi, i.e. the
    // half-density factor mod sign
    out[nu] = std::exp(Cx{0.0, -1.0} * std::imag(h));
  }
  return out;
}

// ---------------------------------------------------------------------------
// chi2 (quotient)

Cx HallChi2::value(Cx z) const { return combined->value(z) / chi1->value(z); }

Cx HallChi2::boundary_plus(int circle, double theta) const {
  return combined->boundary_plus(circle, theta) / chi1->boundary_plus(circle, theta);
}

// ---------------------------------------------------------------------------
// Solution evaluators

Cx HallSolution::omega(Cx z) const {
  Cx sum{0.0, 0.0};
  std::size_t m = 0;
  for (const auto& entry : schedule.circles)
    for (Cx zp : entry.points) sum += C[m++] * eval_M(*mctx, z, zp);
  return sum;
}

Cx HallSolution::evaluate(Cx z) const {
  if (!spec.domain.in_domain(z, 0.0))
    throw std::invalid_argument("hall: evaluation point outside the plate");
  const Cx zt = reflect(spec.domain.circles[0], z);
  return chi.value(z) * (C0 + omega(z) + std::conj(omega(zt)));
}

Cx HallSolution::boundary_value(int circle, double theta) const {
  const std::size_t nu = static_cast<std::size_t>(circle);
  const Cx H = chi.characters.H[nu];
  const Cx t = spec.domain.circles[nu].point(theta);
  Cx bracket = Cx{C0, 0.0} + omega(t);
  if (circle == 0) {
    bracket += std::conj(omega(t));
  } else {
    const Cx w = generator_map(spec.domain, circle)(infinity_point());
    bracket += std::conj((omega(t) - omega(w)) / H);
  }
  return chi_plus_robust(chi, field, circle, theta) * bracket;
}

FieldSample HallSolution::field_at(Cx z) const {
  const Cx phi = evaluate(z);
  FieldSample s;
  s.Jx = phi.real();
  s.Jy = -phi.imag();
  // Ohm's law in the sign convention of the electrode condition: with the
  // boundary coefficients above, E_tau = 0 holds for E = (alpha - i beta) J
  const Cx e = Cx{spec.resistivity, -spec.hall} * std::conj(phi);
  s.Ex = e.real();
  s.Ey = e.imag();
  return s;
}

double HallSolution::computed_current(int nu, int j) const {
  const auto& part = field.circles.at(static_cast<std::size_t>(nu));
  const Circle& circ = spec.domain.circles.at(static_cast<std::size_t>(nu));
  const Arc arc = part.ccw_arc(nu, 2 * j);
  const ElectrodeNodes nodes = electrode_arc_nodes(circ, arc, rule);
  const int jm_start = marked_index_at(part, arc.start_angle);
  const int jm_end = marked_index_at(part, arc.end_angle);
  // On an odd-electrode circle the first marked point closes electrode 1 and
  // Phi keeps a (mild) singularity there even in the solution; near it the
  // bracket value is dominated by rounding noise, so skip the innermost
  // nodes (their true contribution is far below the target accuracy).
  const bool divergent_end =
      branch.circles.at(static_cast<std::size_t>(nu)).l == 1 && j == 0;
  const double cutoff = 1e-16 * arc_span(arc);
  const Cx H = chi.characters.H[static_cast<std::size_t>(nu)];
  const Cx w_nu = (nu >= 1) ? generator_map(spec.domain, nu)(infinity_point()) : Cx{0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.theta.size(); ++i) {
    if (divergent_end && nodes.end[i] == 1 && nodes.dist[i] < cutoff) continue;
    const double th = nodes.theta[i];
    const int jm = nodes.end[i] == 0 ? jm_start : jm_end;
    const double sign = nodes.end[i] == 0 ? 1.0 : -1.0;
    const Cx chip = chi_plus_near(chi, field, nu, jm, sign, nodes.dist[i]);
    Cx bracket = Cx{C0, 0.0} + omega(nodes.tau[i]);
    if (nu == 0)
      bracket += std::conj(omega(nodes.tau[i]));
    else
      bracket += std::conj((omega(nodes.tau[i]) - omega(w_nu)) / H);
    total += -std::real(chip * bracket * std::polar(1.0, th)) * std::abs(nodes.w[i]);
  }
  return spec.thickness * total;
}

Cx HallSolution::s_plus(std::size_t m, Cx z) const {
  std::size_t k = 0;
  Cx zm{0.0, 0.0};
  for (const auto& entry : schedule.circles)
    for (Cx zp : entry.points)
      if (k++ == m) zm = zp;
  const Cx d0 = spec.domain.circles[0].center;
  const Cx md = eval_M(*mctx, d0, zm);
  const Cx zt = reflect(spec.domain.circles[0], z);
  return chi.value(z) * (-0.5 * md - 0.5 * std::conj(md) + eval_M(*mctx, z, zm) +
                         std::conj(eval_M(*mctx, zt, zm)));
}

Cx HallSolution::s_minus(std::size_t m, Cx z) const {
  std::size_t k = 0;
  Cx zm{0.0, 0.0};
  for (const auto& entry : schedule.circles)
    for (Cx zp : entry.points)
      if (k++ == m) zm = zp;
  const Cx d0 = spec.domain.circles[0].center;
  const Cx md = eval_M(*mctx, d0, zm);
  const Cx zt = reflect(spec.domain.circles[0], z);
  return chi.value(z) * (-0.5 * md + 0.5 * std::conj(md) + eval_M(*mctx, z, zm) -
                         std::conj(eval_M(*mctx, zt, zm)));
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

// Appends Re or Im of w0*C0 + sum_m w_m*C_m to row `r` of A.
void add_complex_row(Eigen::MatrixXd& A, int r, Cx w0, const std::vector<Cx>& wm,
                     bool imaginary_part) {
  auto pick = [imaginary_part](Cx v) { return imaginary_part ? v.imag() : v.real(); };
  A(r, 0) += pick(w0);
  for (std::size_t m = 0; m < wm.size(); ++m) {
    A(r, static_cast<int>(2 * m + 1)) += pick(wm[m]);
    A(r, static_cast<int>(2 * m + 2)) += pick(Cx{0.0, 1.0} * wm[m]);
  }
}

}  // namespace

HallAssembly assemble_hall_system(const HallSolution& sol) {
  const HallPlateSpec& spec = sol.spec;
  const DomainSpec& dom = spec.domain;
  const int N = static_cast<int>(dom.size()) - 1;
  const int N0 = spec.last_even_circle();
  std::vector<Cx> points;
  for (const auto& entry : sol.schedule.circles)
    for (Cx zp : entry.points) points.push_back(zp);
  const int kappa = static_cast<int>(points.size());
  const int cols = 1 + 2 * kappa;
  int odd_circles = 0;
  for (const auto& cb : sol.branch.circles)
    if (cb.l == 1) ++odd_circles;
  (void)N0;
  const int nrows = N + 2 + odd_circles + (N + 1) + spec.total_electrodes();

  HallAssembly out;
  out.A = Eigen::MatrixXd::Zero(nrows, cols);
  out.b = Eigen::VectorXd::Zero(nrows);
  int r = 0;

  auto M_at = [&](Cx z) {
    std::vector<Cx> v(points.size());
    for (std::size_t m = 0; m < points.size(); ++m) v[m] = eval_M(*sol.mctx, z, points[m]);
    return v;
  };

  // invariance at the generator images of infinity
  for (int nu = 1; nu <= N; ++nu) {
    const Cx hh = principal_half(sol.chi.characters.H[static_cast<std::size_t>(nu)]);
    const Cx w = generator_map(dom, nu)(infinity_point());
    std::vector<Cx> wm = M_at(w);
    for (Cx& v : wm) v /= hh;
    add_complex_row(out.A, r, 1.0 / hh, wm, /*imaginary_part=*/true);
    std::ostringstream os;
    os << "invariance circle " << nu;
    out.row_labels.push_back(os.str());
    ++r;
  }

  // simple zero at infinity: C0 + Re Omega(delta0) = 0, Im Omega(delta0) = 0
  {
    const std::vector<Cx> wm = M_at(dom.circles[0].center);
    add_complex_row(out.A, r, Cx{1.0, 0.0}, wm, false);
    out.row_labels.push_back("infinity re");
    ++r;
    add_complex_row(out.A, r, Cx{0.0, 0.0}, wm, true);
    out.row_labels.push_back("infinity im");
    ++r;
  }

  // Integrability at t_nu1 of every circle whose first exponent lies in
  // (-1, -1/2]: the bracket must vanish there to cancel the non-integrable
  // leading power, which leaves the generic integrable edge singularity.
  for (int nu = 0; nu <= N; ++nu) {
    if (sol.branch.circles[static_cast<std::size_t>(nu)].l != 1) continue;
    const Cx hh = principal_half(sol.chi.characters.H[static_cast<std::size_t>(nu)]);
    const Cx t1 = dom.circles[static_cast<std::size_t>(nu)].point(
        spec.circles[static_cast<std::size_t>(nu)].marked_angles[0]);
    std::vector<Cx> wm = M_at(t1);
    if (nu >= 1) {
      const std::vector<Cx> wv = M_at(generator_map(dom, nu)(infinity_point()));
      for (std::size_t m = 0; m < wm.size(); ++m) wm[m] = 2.0 * wm[m] - wv[m];
    } else {
      for (Cx& v : wm) v *= 2.0;
    }
    for (Cx& v : wm) v /= hh;
    add_complex_row(out.A, r, 1.0 / hh, wm, false);
    std::ostringstream os;
    os << "endpoint circle " << nu;
    out.row_labels.push_back(os.str());
    ++r;
  }

  // Single-valued potential: the electric field must have zero circulation
  // around every hole. With E = (alpha - i beta) conj(Phi) this is
  // Re[(alpha + i beta) contour-integral of Phi] = 0, one row per hole,
  // evaluated on a circle in the material around the hole.
  for (int nu = 0; nu <= N; ++nu) {
    const Circle& hole = dom.circles[static_cast<std::size_t>(nu)];
    // keep the contour outside the hole's zero schedule but clear of the
    // other holes and their schedules
    double reach = hole.radius;
    for (Cx zp : sol.schedule.circles[static_cast<std::size_t>(nu)].points)
      reach = std::max(reach, std::abs(zp - hole.center));
    const double lo = std::max(1.45 * hole.radius, 1.15 * reach);
    double hi = 1e300;
    for (int mu = 0; mu <= N; ++mu) {
      if (mu == nu) continue;
      const Circle& other = dom.circles[static_cast<std::size_t>(mu)];
      double other_reach = other.radius;
      for (Cx zp : sol.schedule.circles[static_cast<std::size_t>(mu)].points)
        other_reach = std::max(other_reach, std::abs(zp - other.center));
      hi = std::min(hi, 0.85 * (std::abs(other.center - hole.center) - other_reach));
    }
    const double radius = std::min(std::max(1.7 * hole.radius, lo), std::max(hi, lo));
    const int n = 384;
    const Cx weight{spec.resistivity, spec.hall};
    for (int i = 0; i < n; ++i) {
      const Cx dir = std::polar(1.0, kTwoPi * i / n);
      const Cx z = hole.center + radius * dir;
      const Cx dz = Cx{0.0, 1.0} * radius * dir * (kTwoPi / n);
      const Cx chiz = sol.chi.value(z);
      const Cx zt = reflect(dom.circles[0], z);
      out.A(r, 0) += std::real(weight * chiz * dz);
      for (std::size_t m = 0; m < points.size(); ++m) {
        const Cx mt = eval_M(*sol.mctx, z, points[m]);
        const Cx mtt = std::conj(eval_M(*sol.mctx, zt, points[m]));
        const Cx re_col = chiz * (mt + mtt);
        const Cx im_col = chiz * Cx{0.0, 1.0} * (mt - mtt);
        out.A(r, static_cast<int>(2 * m + 1)) += std::real(weight * re_col * dz);
        out.A(r, static_cast<int>(2 * m + 2)) += std::real(weight * im_col * dz);
      }
    }
    std::ostringstream os;
    os << "circulation hole " << nu;
    out.row_labels.push_back(os.str());
    ++r;
  }

  // electrode current rows
  for (std::size_t nu = 0; nu < spec.circles.size(); ++nu) {
    const auto& part = sol.field.circles[nu];
    const Circle& circ = dom.circles[nu];
    const Cx H = sol.chi.characters.H[nu];
    const Cx wball = (nu >= 1) ? generator_map(dom, static_cast<int>(nu))(infinity_point())
                               : infinity_point();
    std::vector<Cx> Mw(points.size(), Cx{0.0, 0.0});
    if (nu >= 1) Mw = M_at(wball);
    // column values of the bracket C0 + Omega + conj((Omega - Omega(w))/H)
    // at the first marked point, for the divergent-endpoint subtraction below
    const bool odd_circle = sol.branch.circles[nu].l == 1;
    const double theta1 = spec.circles[nu].marked_angles[0];
    std::vector<Cx> re1(points.size()), im1(points.size());
    if (odd_circle) {
      const std::vector<Cx> Mt1 = M_at(circ.point(theta1));
      for (std::size_t m = 0; m < points.size(); ++m) {
        const Cx tail =
            (nu >= 1) ? std::conj((Mt1[m] - Mw[m]) / H) : std::conj(Mt1[m]);
        re1[m] = Mt1[m] + tail;
        im1[m] = Cx{0.0, 1.0} * Mt1[m] - Cx{0.0, 1.0} * tail;
      }
    }
    for (int j = 0; j < spec.circles[nu].electrode_count(); ++j) {
      const Arc arc = part.ccw_arc(static_cast<int>(nu), 2 * j);
      const ElectrodeNodes nodes = electrode_arc_nodes(circ, arc, sol.rule);
      const int jm_start = marked_index_at(part, arc.start_angle);
      const int jm_end = marked_index_at(part, arc.end_angle);
      // On an odd-electrode circle the column integrands are non-integrable
      // at t_nu1 (exponent below -1). Subtract the column's value there: the
      // endpoint row forces the bracket to vanish at t_nu1, so the dropped
      // divergent part carries no information about the solution.
      const bool subtract = odd_circle && j == 0;
      const double cutoff = 1e-16 * arc_span(arc);
      for (std::size_t i = 0; i < nodes.theta.size(); ++i) {
        const double th = nodes.theta[i];
        if (subtract && nodes.end[i] == 1 && nodes.dist[i] < cutoff) continue;
        const double ds = std::abs(nodes.w[i]);
        const int jm = nodes.end[i] == 0 ? jm_start : jm_end;
        const double sgn = nodes.end[i] == 0 ? 1.0 : -1.0;
        const Cx chip =
            chi_plus_near(sol.chi, sol.field, static_cast<int>(nu), jm, sgn, nodes.dist[i]);
        const Cx phase = std::polar(1.0, th);
        const std::vector<Cx> Mt = M_at(nodes.tau[i]);
        // columns of Phi^+ = chi^+ (C0 + Omega + conj((Omega - Omega(w))/H))
        const Cx c0 = subtract ? Cx{0.0, 0.0} : chip;
        out.A(r, 0) += -std::real(c0 * phase) * ds;
        for (std::size_t m = 0; m < points.size(); ++m) {
          Cx tail{0.0, 0.0};
          if (nu >= 1)
            tail = std::conj((Mt[m] - Mw[m]) / H);
          else
            tail = std::conj(Mt[m]);
          Cx re_col = Mt[m] + tail;
          Cx im_col = Cx{0.0, 1.0} * Mt[m] - Cx{0.0, 1.0} * tail;
          if (subtract) {
            re_col -= re1[m];
            im_col -= im1[m];
          }
          out.A(r, static_cast<int>(2 * m + 1)) += -std::real(chip * re_col * phase) * ds;
          out.A(r, static_cast<int>(2 * m + 2)) += -std::real(chip * im_col * phase) * ds;
        }
      }
      out.b(r) = spec.circles[nu].currents[static_cast<std::size_t>(j)] / spec.thickness;
      std::ostringstream os;
      os << "current circle " << nu << " electrode " << j + 1;
      out.row_labels.push_back(os.str());
      ++r;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Driver

HallSolution solve_hall(const HallPlateSpec& spec, const QuadratureRule& rule,
                        int group_level) {
  spec.validate();
  HallSolution sol;
  sol.spec = spec;
  sol.rule = rule;
  sol.field = build_coefficients(spec);
  sol.branch = combined_branch(spec, sol.field);
  sol.chi2_tables = hall_parameters(spec);
  sol.group = std::make_shared<GroupEnumeration>(enumerate_group(spec.domain, group_level));
  sol.kctx = std::make_shared<KernelContext>(make_kernel_context(*sol.group));
  sol.kctx->prepare();
  sol.schedule = choose_schedule(spec.domain, sol.field, sol.branch);
  sol.chi = build_chi(*sol.kctx, spec.domain, sol.field, sol.branch, sol.schedule, rule);
  sol.chi1 = std::make_shared<HallChi1>(build_chi1(*sol.kctx, spec, rule));
  sol.chi2.combined = std::make_shared<CanonicalFunction>(sol.chi);
  sol.chi2.chi1 = sol.chi1;
  sol.chi2.H2.resize(spec.domain.size());
  for (std::size_t nu = 0; nu < spec.domain.size(); ++nu)
    sol.chi2.H2[nu] = sol.chi.characters.H[nu] / sol.chi1->H1[nu];
  sol.mctx = std::make_shared<KernelContext>(make_kernel_context(*sol.group));
  sol.mctx->characters = sol.chi.characters;
  sol.mctx->prepare();

  const HallAssembly sys = assemble_hall_system(sol);
  if (sys.A.rows() != sys.A.cols()) {
    std::ostringstream os;
    os << "hall: system is " << sys.A.rows() << "x" << sys.A.cols() << ", expected square";
    throw std::logic_error(os.str());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd x = svd.solve(sys.b);
  sol.diagnostics.condition_estimate =
      svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  sol.diagnostics.residual_norm = (sys.A * x - sys.b).norm();
  if (sol.diagnostics.condition_estimate > 1e12) {
    std::ostringstream os;
    os << "hall: singular constraint system (condition " << sol.diagnostics.condition_estimate
       << ")";
    throw std::runtime_error(os.str());
  }
  sol.C0 = x(0);
  const int kappa = (static_cast<int>(x.size()) - 1) / 2;
  sol.C.resize(static_cast<std::size_t>(kappa));
  for (int m = 0; m < kappa; ++m) sol.C[static_cast<std::size_t>(m)] = Cx{x(2 * m + 1), x(2 * m + 2)};

  // canonical-function defect: the boundary ratio must reproduce the factors
  double defect = 0.0;
  for (std::size_t nu = 0; nu < spec.domain.size(); ++nu) {
    const auto& part = sol.field.circles[nu];
    for (int j = 0; j < part.m(); ++j) {
      const double mid = part.marked_angles[static_cast<std::size_t>(j)] - 0.5 * part.gap(j);
      const Cx cp = sol.chi.boundary_plus(static_cast<int>(nu), mid);
      const Cx ratio = sol.field.p_at(static_cast<int>(nu), mid) * std::conj(cp) / cp;
      defect = std::max(defect, std::abs(ratio - sol.chi.characters.H[nu]));
    }
  }
  sol.diagnostics.ratio_defect = defect;

  // far field: with zero net current and a single-valued potential the 1/z
  // coefficient of Phi cancels exactly, so the leading behavior is the
  // dipole z^-2; compare z^2 * Phi between two far circles
  {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& c : spec.domain.circles) {
      xmin = std::min(xmin, c.center.real() - c.radius);
      xmax = std::max(xmax, c.center.real() + c.radius);
      ymin = std::min(ymin, c.center.imag() - c.radius);
      ymax = std::max(ymax, c.center.imag() + c.radius);
    }
    const Cx mid{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
    const double diam = std::max(xmax - xmin, ymax - ymin);
    const double R1 = 10.0 * diam, R2 = 20.0 * diam;
    Cx mean{0.0, 0.0};
    double dev = 0.0;
    std::vector<Cx> inner(8), outer(8);
    for (int s = 0; s < 8; ++s) {
      const Cx dir = std::polar(1.0, kTwoPi * s / 8.0);
      const Cx z1 = mid + R1 * dir, z2 = mid + R2 * dir;
      inner[static_cast<std::size_t>(s)] = (z1 - mid) * (z1 - mid) * sol.evaluate(z1);
      outer[static_cast<std::size_t>(s)] = (z2 - mid) * (z2 - mid) * sol.evaluate(z2);
      mean += outer[static_cast<std::size_t>(s)];
    }
    mean /= 8.0;
    for (int s = 0; s < 8; ++s)
      dev = std::max(dev, std::abs(outer[static_cast<std::size_t>(s)] -
                                   inner[static_cast<std::size_t>(s)]));
    sol.diagnostics.far_field_coefficient = mean;
    sol.diagnostics.far_field_variation = dev / std::max(std::abs(mean), 1e-300);
  }
  return sol;
}

}  // namespace mch
