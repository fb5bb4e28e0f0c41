#pragma once

// Boundary coefficient data a·u + b·v = c on partitioned circles, the
// p,q-transform of the symmetrized jump problem, and the branch bookkeeping
// of arg p (winding numbers κ_ν, endpoint exponents α_νj, parity flags l_ν,
// and the total index).
//
// Orientation: the positive direction along the boundary keeps the domain D
// (the exterior of all disks) on the left, i.e. runs clockwise around each
// circle. Marked points are stored in that order: t_{ν,j+1} follows t_νj
// clockwise. t⁺/t⁻ denote the one-sided values leaving/approaching a marked
// point along the positive direction.

#include <functional>
#include <vector>

#include "mch/contour.hpp"
#include "mch/geometry.hpp"

namespace mch {

struct ArcCoefficients {
  double a = 1.0, b = 0.0, c = 0.0;
  // Optional angle-dependent coefficients (Hölder); when set they override
  // the constants.
  std::function<double(double)> fa, fb, fc;

  bool is_constant() const { return !fa && !fb && !fc; }
  void eval(double theta, double& av, double& bv, double& cv) const;
};

struct CirclePartition {
  // Marked angles t_ν1, t_ν2, ... in positive (clockwise) order.
  std::vector<double> marked_angles;
  std::vector<ArcCoefficients> arcs;  // arc j runs t_νj -> t_ν(j+1) clockwise

  int m() const { return static_cast<int>(marked_angles.size()); }
  // Clockwise angular length of arc j, in (0, 2π].
  double gap(int j) const;
  // Index of the arc containing angle theta (clockwise from the marked point).
  int arc_containing(double theta) const;
  // The ccw Arc object covering arc j (used by quadrature).
  Arc ccw_arc(int circle_index, int j) const;
};

struct CoefficientField {
  std::vector<CirclePartition> circles;

  void validate(const DomainSpec& dom) const;
  // p = -(a+ib)/(a-ib), q = 2c/(a-ib) at a boundary point (|p| = 1).
  void p_q(int nu, double theta, Cx& p, Cx& q) const;
  Cx p_at(int nu, double theta) const;
  Cx q_at(int nu, double theta) const;
  // ccw arcs per circle, suitable for build_boundary_grid.
  std::vector<std::vector<Arc>> ccw_arcs() const;
};

struct CircleBranch {
  // Unwrapped arg p at the start (t_νj⁺) and end (t_ν(j+1)⁻) of each arc,
  // following the inequality chain that pins the branch at t_ν1 to (-π, π]
  // and each jump arg p(t⁻) - arg p(t⁺) into (-2π, 0].
  std::vector<double> argp_start, argp_end;
  std::vector<double> alpha;  // α_νj per marked point; alpha[0] includes -κ_ν
  int kappa = 0;              // winding κ_ν
  int l = 0;                  // 1 iff α_ν1 ∈ (-1, -1/2]
  // Unwrapped samples per arc (clockwise from the arc start) used to resolve
  // the branch of arg p at arbitrary angles.
  std::vector<std::vector<double>> sample_argp;
};

struct BranchData {
  std::vector<CircleBranch> circles;
  int samples_per_arc = 720;

  int kappa_plus() const;   // Σ max(κ_ν, 0)
  int kappa_minus() const;  // Σ max(-κ_ν, 0)
  int l_total() const;
  int total_index() const;  // 𝕶 = Σ (2κ_ν - l_ν)
  // Σ_ν (Σ_j α_νj + κ_ν); zero for admissible piecewise-constant data.
  double gamma_exponent() const;
};

// Unwrap arg p along every circle. Doubles the sampling (up to 8x) when the
// per-step change exceeds the resolution threshold, then fails.
BranchData unwrap_branches(const DomainSpec& dom, const CoefficientField& field,
                           int samples_per_arc = 720);

// Branch-resolved arg p at an arbitrary angle of arc `arc` on circle `nu`.
double argp_value(const CoefficientField& field, const BranchData& branch,
                  int nu, int arc, double theta);

enum class IndexRegime { negative, intermediate, large };

struct IndexReport {
  int N = 0;
  int kappa_plus = 0, kappa_minus = 0, l_total = 0;
  int index = 0;  // 𝕶
  IndexRegime regime = IndexRegime::intermediate;
  // Homogeneous family dimension: exact in the negative (0) and large
  // (𝕶-N+1) regimes; in the intermediate regime an upper bound 2κ⁺+1-rank
  // is only known after assembly, so the bound 2κ⁺+1 is reported here.
  int family_dimension_bound = 0;
  bool family_dimension_exact = false;
  // Solvability conditions for the inhomogeneous problem: N-𝕶-1 when
  // 𝕶 < 0, otherwise 0.
  int solvability_conditions = 0;
  double gamma_exponent = 0.0;
};

IndexReport index_report(const BranchData& branch, int N);

}  // namespace mch
