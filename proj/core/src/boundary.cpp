#include "mch/boundary.hpp"

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

// p evaluated with a specific arc's coefficients; unambiguous at marked points.
Cx p_on_arc(const CirclePartition& part, int j, double theta) {
  double a, b, c;
  part.arcs[static_cast<std::size_t>(j)].eval(theta, a, b, c);
  return -Cx{a, b} / Cx{a, -b};
}
}  // namespace

void ArcCoefficients::eval(double theta, double& av, double& bv, double& cv) const {
  av = fa ? fa(theta) : a;
  bv = fb ? fb(theta) : b;
  cv = fc ? fc(theta) : c;
}

double CirclePartition::gap(int j) const {
  const int mm = m();
  const double from = marked_angles[static_cast<std::size_t>(j)];
  const double to = marked_angles[static_cast<std::size_t>((j + 1) % mm)];
  // clockwise gap
  double g = mod_2pi(from - to);
  if (g == 0.0) g = kTwoPi;  // single marked point: full circle
  return g;
}

int CirclePartition::arc_containing(double theta) const {
  const int mm = m();
  // walk clockwise from each marked point
  for (int j = 0; j < mm; ++j) {
    const double off = mod_2pi(marked_angles[static_cast<std::size_t>(j)] - theta);
    if (off <= gap(j)) return j;
  }
  return mm - 1;
}

Arc CirclePartition::ccw_arc(int circle_index, int j) const {
  const double start = marked_angles[static_cast<std::size_t>(j)] - gap(j);
  return Arc{circle_index, start, marked_angles[static_cast<std::size_t>(j)]};
}

void CoefficientField::validate(const DomainSpec& dom) const {
  if (circles.size() != dom.circles.size())
    throw std::invalid_argument("coefficient field: circle count mismatch");
  for (std::size_t nu = 0; nu < circles.size(); ++nu) {
    const auto& part = circles[nu];
    if (part.m() < 1) throw std::invalid_argument("coefficient field: empty partition");
    if (part.arcs.size() != part.marked_angles.size())
      throw std::invalid_argument("coefficient field: arcs/marked points mismatch");
    double total = 0.0;
    for (int j = 0; j < part.m(); ++j) total += part.gap(j);
    if (std::abs(total - kTwoPi) > 1e-9) {
      std::ostringstream os;
      os << "coefficient field: circle " << nu
         << " marked points are not in clockwise order (gaps sum to " << total << ")";
      throw std::invalid_argument(os.str());
    }
    // a^2 + b^2 must not vanish anywhere (sampled).
    for (int j = 0; j < part.m(); ++j) {
      const auto& ac = part.arcs[static_cast<std::size_t>(j)];
      const int probes = ac.is_constant() ? 1 : 32;
      for (int k = 0; k < probes; ++k) {
        const double th = part.marked_angles[static_cast<std::size_t>(j)] -
                          part.gap(j) * (k + 0.5) / probes;
        double a, b, c;
        ac.eval(th, a, b, c);
        if (a * a + b * b < 1e-14)
          throw std::invalid_argument("coefficient field: a^2+b^2 vanishes");
      }
    }
  }
}

void CoefficientField::p_q(int nu, double theta, Cx& p, Cx& q) const {
  const auto& part = circles.at(static_cast<std::size_t>(nu));
  const int j = part.arc_containing(theta);
  double a, b, c;
  part.arcs[static_cast<std::size_t>(j)].eval(theta, a, b, c);
  const Cx den{a, -b};
  p = -Cx{a, b} / den;
  q = 2.0 * c / den;
}

Cx CoefficientField::p_at(int nu, double theta) const {
  Cx p, q;
  p_q(nu, theta, p, q);
  return p;
}

Cx CoefficientField::q_at(int nu, double theta) const {
  Cx p, q;
  p_q(nu, theta, p, q);
  return q;
}

std::vector<std::vector<Arc>> CoefficientField::ccw_arcs() const {
  std::vector<std::vector<Arc>> out(circles.size());
  for (std::size_t nu = 0; nu < circles.size(); ++nu)
    for (int j = 0; j < circles[nu].m(); ++j)
      out[nu].push_back(circles[nu].ccw_arc(static_cast<int>(nu), j));
  return out;
}

int BranchData::kappa_plus() const {
  int k = 0;
  for (const auto& c : circles) k += std::max(c.kappa, 0);
  return k;
}
int BranchData::kappa_minus() const {
  int k = 0;
  for (const auto& c : circles) k += std::max(-c.kappa, 0);
  return k;
}
int BranchData::l_total() const {
  int l = 0;
  for (const auto& c : circles) l += c.l;
  return l;
}
int BranchData::total_index() const {
  int idx = 0;
  for (const auto& c : circles) idx += 2 * c.kappa - c.l;
  return idx;
}
double BranchData::gamma_exponent() const {
  double g = 0.0;
  for (const auto& c : circles) {
    for (double a : c.alpha) g += a;
    g += c.kappa;
  }
  return g;
}

namespace {

// Unwrap one arc clockwise; returns false on a resolution failure.
bool unwrap_arc(const CirclePartition& part, int j, int nsamp,
                std::vector<double>& vals) {
  vals.resize(static_cast<std::size_t>(nsamp));
  const double th0 = part.marked_angles[static_cast<std::size_t>(j)];
  const double g = part.gap(j);
  for (int k = 0; k < nsamp; ++k) {
    const double th = th0 - g * k / (nsamp - 1);
    const double raw = std::arg(p_on_arc(part, j, th));
    if (k == 0) {
      vals[0] = raw;
    } else {
      const double prev = vals[static_cast<std::size_t>(k - 1)];
      const double v = raw + kTwoPi * std::round((prev - raw) / kTwoPi);
      if (std::abs(v - prev) > 0.5 * kPi) return false;
      vals[static_cast<std::size_t>(k)] = v;
    }
  }
  return true;
}

}  // namespace

BranchData unwrap_branches(const DomainSpec& dom, const CoefficientField& field,
                           int samples_per_arc) {
  field.validate(dom);
  BranchData out;
  out.samples_per_arc = samples_per_arc;
  out.circles.resize(field.circles.size());
  for (std::size_t nu = 0; nu < field.circles.size(); ++nu) {
    const auto& part = field.circles[nu];
    CircleBranch& cb = out.circles[nu];
    const int m = part.m();
    cb.argp_start.resize(static_cast<std::size_t>(m));
    cb.argp_end.resize(static_cast<std::size_t>(m));
    cb.alpha.assign(static_cast<std::size_t>(m), 0.0);
    cb.sample_argp.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      std::vector<double> vals;
      int nsamp = std::max(2, samples_per_arc);
      bool ok = false;
      for (int attempt = 0; attempt < 4 && !ok; ++attempt, nsamp *= 2)
        ok = unwrap_arc(part, j, nsamp, vals);
      if (!ok) {
        std::ostringstream os;
        os << "unwrap_branches: cannot resolve arg p on circle " << nu
           << " arc " << j << " (jump too fast even at " << nsamp / 2
           << " samples)";
        throw std::runtime_error(os.str());
      }
      // Anchor the arc start per the inequality chain.
      double shift = 0.0;
      if (j == 0) {
        // arg p(t_ν1⁺) ∈ (-π, π]: the raw principal value already is.
        if (vals[0] <= -kPi) shift = kTwoPi;
      } else {
        // arg p(t⁻) - arg p(t⁺) ∈ (-2π, 0]: smallest start ≥ previous end.
        const double prev_end = cb.argp_end[static_cast<std::size_t>(j - 1)];
        shift = kTwoPi * std::ceil((prev_end - vals[0]) / kTwoPi - 1e-12);
      }
      for (double& v : vals) v += shift;
      cb.argp_start[static_cast<std::size_t>(j)] = vals.front();
      cb.argp_end[static_cast<std::size_t>(j)] = vals.back();
      if (j > 0) {
        cb.alpha[static_cast<std::size_t>(j)] =
            (cb.argp_end[static_cast<std::size_t>(j - 1)] -
             cb.argp_start[static_cast<std::size_t>(j)]) / (2.0 * kTwoPi);
      }
      cb.sample_argp[static_cast<std::size_t>(j)] = std::move(vals);
    }
    // Close the circle at t_ν1: the 4π-normalized winding is κ_ν.
    const double diff = cb.argp_end[static_cast<std::size_t>(m - 1)] - cb.argp_start[0];
    cb.kappa = static_cast<int>(std::ceil(diff / (2.0 * kTwoPi) - 1e-12));
    cb.alpha[0] = diff / (2.0 * kTwoPi) - cb.kappa;
    cb.l = (cb.alpha[0] <= -0.5 + 1e-9 && cb.alpha[0] > -1.0) ? 1 : 0;
  }
  return out;
}

double argp_value(const CoefficientField& field, const BranchData& branch,
                  int nu, int arc, double theta) {
  const auto& part = field.circles.at(static_cast<std::size_t>(nu));
  const auto& samples =
      branch.circles.at(static_cast<std::size_t>(nu)).sample_argp.at(static_cast<std::size_t>(arc));
  const double g = part.gap(arc);
  const double off = mod_2pi(part.marked_angles[static_cast<std::size_t>(arc)] - theta);
  const double pos = std::clamp(off / g, 0.0, 1.0) * (samples.size() - 1);
  const std::size_t i0 = static_cast<std::size_t>(std::min(
      static_cast<double>(samples.size() - 2), std::floor(pos)));
  const double frac = pos - static_cast<double>(i0);
  const double ref = samples[i0] * (1.0 - frac) + samples[i0 + 1] * frac;
  const double raw = std::arg(p_on_arc(part, arc, theta));
  return raw + kTwoPi * std::round((ref - raw) / kTwoPi);
}

IndexReport index_report(const BranchData& branch, int N) {
  IndexReport r;
  r.N = N;
  r.kappa_plus = branch.kappa_plus();
  r.kappa_minus = branch.kappa_minus();
  r.l_total = branch.l_total();
  r.index = branch.total_index();
  r.gamma_exponent = branch.gamma_exponent();
  if (r.index < 0) {
    r.regime = IndexRegime::negative;
    r.family_dimension_bound = 0;
    r.family_dimension_exact = true;
    r.solvability_conditions = N - r.index - 1;
  } else if (r.index <= 2 * N - 2) {
    r.regime = IndexRegime::intermediate;
    r.family_dimension_bound = 2 * r.kappa_plus + 1;  // minus rank, known post-assembly
    r.family_dimension_exact = false;
    r.solvability_conditions = 0;
  } else {
    r.regime = IndexRegime::large;
    r.family_dimension_bound = r.index - N + 1;
    r.family_dimension_exact = true;
    r.solvability_conditions = 0;
  }
  return r;
}

}  // namespace mch
