#include "mch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mch {

Cx reflect(const Circle& c, Cx z) {
  if (is_infinite(z)) return c.center;
  const Cx w = std::conj(z - c.center);
  if (std::abs(w) == 0.0) return infinity_point();
  return c.center + c.radius * c.radius / w;
}

double DomainSpec::scale() const {
  double s = 0.0;
  for (const auto& c : circles) s = std::max(s, c.radius);
  return s;
}

void DomainSpec::validate() const {
  if (circles.empty()) throw std::invalid_argument("domain: no circles given");
  const double tol = 1e-9 * scale();
  for (std::size_t i = 0; i < circles.size(); ++i) {
    if (!(circles[i].radius > 0.0) || is_infinite(circles[i].center)) {
      std::ostringstream os;
      os << "domain: circle " << i << " is degenerate";
      throw std::invalid_argument(os.str());
    }
    for (std::size_t j = i + 1; j < circles.size(); ++j) {
      const double gap = std::abs(circles[i].center - circles[j].center) -
                         circles[i].radius - circles[j].radius;
      if (gap <= tol) {
        std::ostringstream os;
        os << "domain: circles " << i << " and " << j
           << " are not strictly disjoint (gap " << gap << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }
}

bool DomainSpec::in_domain(Cx z, double clearance) const {
  if (is_infinite(z)) return true;
  for (const auto& c : circles)
    if (c.distance(z) < clearance) return false;
  return true;
}

int DomainSpec::disk_containing(Cx z, double tol) const {
  if (is_infinite(z)) return -1;
  for (std::size_t i = 0; i < circles.size(); ++i)
    if (circles[i].distance(z) < -tol) return static_cast<int>(i);
  return -1;
}

bool DomainSpec::in_fundamental_region(Cx z, double tol) const {
  if (in_domain(z, -tol)) return true;
  const int k = disk_containing(z, tol);
  if (k != 0) return false;
  return in_domain(reflect(circles[0], z), -tol);
}

MobiusMap MobiusMap::normalized() const {
  const Cx s = std::sqrt(det());
  if (std::abs(s) == 0.0) throw std::invalid_argument("mobius: singular map");
  return {a / s, b / s, c / s, d / s};
}

MobiusMap MobiusMap::conjugated() const {
  return {std::conj(a), std::conj(b), std::conj(c), std::conj(d)};
}

MobiusMap MobiusMap::after(const MobiusMap& o) const {
  return {a * o.a + b * o.c, a * o.b + b * o.d,
          c * o.a + d * o.c, c * o.b + d * o.d};
}

Cx MobiusMap::operator()(Cx z) const {
  if (is_infinite(z)) {
    if (std::abs(c) == 0.0) return infinity_point();
    return a / c;
  }
  const Cx den = c * z + d;
  if (std::abs(den) == 0.0) return infinity_point();
  return (a * z + b) / den;
}

bool is_reduced(const GroupWord& w) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == w[i - 1]) return false;
  return true;
}

Cx apply_word(const DomainSpec& dom, const GroupWord& w, Cx z) {
  for (int k : w) z = reflect(dom.circles.at(static_cast<std::size_t>(k)), z);
  return z;
}

namespace {

// Moebius matrix m with T_k(z) = m(conj z).
MobiusMap reflection_matrix(const Circle& c) {
  const Cx d = c.center;
  return MobiusMap{d, c.radius * c.radius - d * std::conj(d), Cx{1.0, 0.0},
                   -std::conj(d)};
}

}  // namespace

MobiusMap compose_word(const DomainSpec& dom, const GroupWord& w) {
  if (w.size() % 2 != 0)
    throw std::invalid_argument("compose_word: odd word is anti-conformal");
  if (!is_reduced(w)) throw std::invalid_argument("compose_word: word not reduced");
  // T_a ∘ T_b = m_a ∘ conj(m_b) as a holomorphic map; the factor conjugation
  // alternates with position counted from the left (last-applied reflection).
  MobiusMap m = MobiusMap::identity();
  bool conj = false;  // leftmost factor unconjugated
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    MobiusMap r = reflection_matrix(dom.circles.at(static_cast<std::size_t>(*it)));
    m = m.after(conj ? r.conjugated() : r);
    conj = !conj;
  }
  return m.normalized();
}

GroupEnumeration enumerate_group(const DomainSpec& dom, int max_level) {
  dom.validate();
  if (max_level < 0) throw std::invalid_argument("enumerate_group: negative level");
  GroupEnumeration g;
  g.domain = dom;
  g.max_level = max_level;
  g.elements.push_back({GroupWord{}, MobiusMap::identity(), 0});
  g.level_offsets = {0, 1};
  g.level_sums.assign(static_cast<std::size_t>(max_level) + 1, 0.0);

  const int m = static_cast<int>(dom.circles.size());
  for (int level = 1; level <= max_level; ++level) {
    // Generate adjacent-distinct words of length 2*level in lexicographic
    // order with a depth-first counter.
    GroupWord w(static_cast<std::size_t>(2 * level), 0);
    std::vector<int> idx(w.size(), -1);
    std::size_t pos = 0;
    double sum = 0.0;
    while (true) {
      int chosen = -1;
      for (int k = idx[pos] + 1; k < m; ++k) {
        if (pos > 0 && w[pos - 1] == k) continue;
        chosen = k;
        break;
      }
      if (chosen < 0) {
        idx[pos] = -1;
        if (pos == 0) break;
        --pos;
        continue;
      }
      idx[pos] = chosen;
      w[pos] = chosen;
      if (pos + 1 == w.size()) {
        MobiusMap mm = compose_word(dom, w);
        const double ac = std::abs(mm.c);
        if (ac > 0.0) sum += std::abs(mm.det()) / (ac * ac);
        g.elements.push_back({w, mm, level});
      } else {
        ++pos;
      }
    }
    g.level_sums[static_cast<std::size_t>(level)] = sum;
    g.level_offsets.push_back(g.elements.size());
  }
  return g;
}

FirstClassReport first_class_check(const GroupEnumeration& group) {
  if (group.max_level < 3)
    throw std::invalid_argument(
        "first_class_check: needs enumeration to level >= 3");
  FirstClassReport rep;
  rep.level_sums = group.level_sums;
  rep.plausibly_first_class = true;
  for (std::size_t mu = 1; mu + 1 < group.level_sums.size(); ++mu) {
    const double s0 = group.level_sums[mu];
    const double s1 = group.level_sums[mu + 1];
    if (s0 <= 0.0) continue;
    const double r = s1 / s0;
    rep.max_ratio = std::max(rep.max_ratio, r);
    if (r >= 1.0) rep.plausibly_first_class = false;
  }
  if (!rep.plausibly_first_class)
    rep.detail = "level sums do not decay geometrically";
  return rep;
}

}  // namespace mch
