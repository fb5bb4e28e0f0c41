#pragma once

// Circular multiply connected domains, circle reflections and the symmetry
// group they generate (even reduced words of reflections = Moebius maps).

#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace mch {

using Cx = std::complex<double>;

// The point at infinity is represented by a non-finite complex value.
inline Cx infinity_point() {
  return {std::numeric_limits<double>::infinity(), 0.0};
}
inline bool is_infinite(Cx z) {
  return !std::isfinite(z.real()) || !std::isfinite(z.imag());
}

struct Circle {
  Cx center{0.0, 0.0};
  double radius = 1.0;

  Cx point(double theta) const { return center + radius * std::polar(1.0, theta); }
  // Signed distance from the circle: negative inside the open disk.
  double distance(Cx z) const { return std::abs(z - center) - radius; }
  bool strictly_inside(Cx z, double tol = 0.0) const {
    return !is_infinite(z) && std::abs(z - center) < radius - tol;
  }
};

// Inversion (anti-conformal reflection) in a circle. Maps the center to
// infinity and infinity to the center.
Cx reflect(const Circle& c, Cx z);

// N+1 pairwise disjoint disks; index 0 is the distinguished circle whose
// reflection T = T_0 builds the two-sheeted fundamental region.
struct DomainSpec {
  std::vector<Circle> circles;

  int holes() const { return static_cast<int>(circles.size()) - 1; }  // N
  std::size_t size() const { return circles.size(); }
  double scale() const;  // max radius, used for tolerances

  // Throws std::invalid_argument when disks touch/overlap or the spec is
  // otherwise malformed (gap tolerance 1e-9 * max radius).
  void validate() const;

  // z lies in the closed exterior D of all disks (infinity included).
  bool in_domain(Cx z, double clearance = 0.0) const;
  // Index of the open disk containing z, or -1.
  int disk_containing(Cx z, double tol = 0.0) const;
  // z in the closed fundamental region F = D ∪ T(D) ∪ L.
  bool in_fundamental_region(Cx z, double tol = 0.0) const;
};

// Moebius map z -> (az+b)/(cz+d), stored with det normalized to 1.
struct MobiusMap {
  Cx a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

  static MobiusMap identity() { return {}; }
  Cx det() const { return a * d - b * c; }
  MobiusMap normalized() const;
  MobiusMap conjugated() const;  // coefficients conjugated: conj∘m∘conj
  // Composition (this ∘ other).
  MobiusMap after(const MobiusMap& other) const;
  Cx operator()(Cx z) const;
};

// A word of reflection indices; word[0] is applied first, so
// word = (k1,...,kn) denotes T_{kn} ∘ ... ∘ T_{k1}.
using GroupWord = std::vector<int>;

// Reduced: adjacent letters distinct (T_k is an involution). Even length.
bool is_reduced(const GroupWord& w);

// Apply a (possibly odd) word of reflections pointwise.
Cx apply_word(const DomainSpec& dom, const GroupWord& w, Cx z);

// Holomorphic Moebius map of an even reduced word. Throws on odd/non-reduced.
MobiusMap compose_word(const DomainSpec& dom, const GroupWord& w);

struct GroupElement {
  GroupWord word;
  MobiusMap map;
  int level = 0;  // half the word length
};

struct GroupEnumeration {
  DomainSpec domain;
  int max_level = 0;
  // Identity first, then levels in increasing order; within a level the
  // words are in lexicographic order (deterministic).
  std::vector<GroupElement> elements;
  std::vector<std::size_t> level_offsets;  // size max_level+2
  // Per-level sums of |a d - b c|/|c|^2 (series convergence measure).
  std::vector<double> level_sums;  // index by level, level 0 entry unused (0)

  std::size_t level_begin(int level) const { return level_offsets[level]; }
  std::size_t level_end(int level) const { return level_offsets[level + 1]; }
};

// Enumerate all even reduced words up to max_level (word length 2*max_level).
// Level mu holds (N+1)*N^(2mu-1) elements.
GroupEnumeration enumerate_group(const DomainSpec& dom, int max_level);

struct FirstClassReport {
  bool plausibly_first_class = false;
  std::vector<double> level_sums;
  double max_ratio = 0.0;  // max successive level-sum ratio
  std::string detail;
};

// Heuristic convergence check of the level sums (requires max_level >= 3).
FirstClassReport first_class_check(const GroupEnumeration& group);

}  // namespace mch
