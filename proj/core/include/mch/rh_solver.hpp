#pragma once

// General solution of the symmetrized jump problem Φ⁺ = pΦ⁻ + q on L:
// homogeneous family χ·[C₀ + Ω₀ + conj(Ω₀∘T₀)], particular integral Ψ₀,
// assembly of the invariance / pole-removal / endpoint constraint rows,
// minimum-norm least-squares solve and solvability classification.

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "mch/boundary.hpp"
#include "mch/canonical.hpp"
#include "mch/contour.hpp"
#include "mch/geometry.hpp"
#include "mch/kernels.hpp"

namespace mch {

// Ω₀(z) = Σ_m C_m · M(z, z_m) over the positive-winding schedule points.
struct Omega0 {
  const KernelContext* ctx = nullptr;  // prepared with the canonical characters
  std::vector<Cx> points;              // z_νj with κ_ν > 0, flattened (ν, then j)
  std::vector<int> point_circle;       // ν of each point
  std::vector<Cx> coeff;               // C_m

  Cx basis(std::size_t m, Cx z) const;
  Cx operator()(Cx z) const;
};

// Ψ₀(z) = (1/2πi)∮_L g(τ)M(z,τ)dτ with g = -q/(2χ⁺) on the ccw grid
// (equals the clockwise 1/(4πi)∮ M q/χ⁺ of the factorization).
struct Psi0 {
  const KernelContext* ctx = nullptr;
  BoundaryGrid grid;
  CanonicalFunction chi;
  CoefficientField field;
  std::vector<Cx> density;   // g at the nodes
  std::vector<Cx> chi_plus;  // cached χ⁺ at the nodes
  bool zero = false;         // homogeneous fast path: Ψ₀ ≡ 0

  Cx operator()(Cx z) const;  // z off L
  // One-sided limits; Ψ₀(domain) - Ψ₀(disk) = q/(2χ⁺).
  Cx boundary(int circle, double theta, bool domain_side) const;
  // Value at a marked point where the density vanishes (l_ν = 1 endpoints);
  // plain quadrature, both one-sided limits coincide.
  Cx at_point(Cx t) const;
};

struct ConstraintRow {
  enum class Kind { invariance, pole_re, pole_im, endpoint, infinity_re, infinity_im };
  Kind kind = Kind::invariance;
  int circle = -1;
  int j = -1;  // schedule point index within the circle (pole rows)
};

struct ConstraintSystem {
  Eigen::MatrixXd A;  // rows x (2κ⁺+1) unknowns [C₀, C′_m, C″_m ...]
  Eigen::VectorXd b;
  std::vector<ConstraintRow> rows;
  std::vector<Cx> h_half;  // recorded principal H_ν^{1/2} per circle
  int rank = 0;
  double sv_threshold = 1e-10;  // relative to the largest singular value
  bool conditioning_warning = false;
  std::vector<double> singular_values;
};

struct SolvabilityReport {
  int index = 0;       // 𝕶
  int unknowns = 0;    // 2κ⁺+1
  int row_count = 0;   // N + l - 2κ⁻ (+2 with the zero-at-infinity rows)
  int rank = 0;
  int family_dimension = 0;  // unknowns - rank (clamped at 0)
  bool feasible = true;
  double residual_norm = 0.0;
  double rhs_norm = 0.0;
  std::vector<int> violated_rows;
  bool conditioning_warning = false;
};

struct RHProblem {
  const KernelContext* ctx = nullptr;
  DomainSpec domain;
  CoefficientField field;
  BranchData branch;
  ZeroPoleSchedule schedule;
  CanonicalFunction chi;
  QuadratureRule rule;
  bool homogeneous = false;        // treat q ≡ 0
  // Optional normalization Φ(∞) = 0 (two extra real rows); used by the
  // half-plane-reducible oracles and the plate problem.
  bool zero_at_infinity = false;
};

struct RHSolution {
  double C0 = 0.0;
  std::vector<Cx> C;  // per positive-winding schedule point
  CanonicalFunction chi;
  DomainSpec domain;
  BranchData branch;
  std::shared_ptr<KernelContext> mctx;  // M-kernel context with χ's characters
  Omega0 omega0;
  Psi0 psi0;
  ConstraintSystem system;
  SolvabilityReport report;
  std::vector<Eigen::VectorXd> null_basis;  // family directions in R^{2κ⁺+1}

  // Φ(z) = χ(z)[C₀ + Ω₀(z) + conj(Ω₀(T₀z)) + Ψ₀(z) + conj(Ψ₀(T₀z))], z ∈ D.
  Cx evaluate(Cx z) const;
  // One-sided boundary values at arc interiors (Φ⁺ - pΦ⁻ = q).
  Cx boundary_plus(int circle, double theta) const;
  Cx boundary_minus(int circle, double theta) const;
  // Apply a null-space direction (scaled) on top of the particular solution.
  void shift(const Eigen::VectorXd& direction, double amount);
};

Omega0 build_omega0(const KernelContext& mctx, const ZeroPoleSchedule& schedule,
                    const std::vector<Cx>& constants);

Psi0 build_psi0(const KernelContext& mctx, const DomainSpec& dom,
                const CoefficientField& field, const CanonicalFunction& chi,
                const QuadratureRule& rule, bool homogeneous);

ConstraintSystem assemble_constraints(const RHProblem& problem,
                                      const KernelContext& mctx, const Omega0& basis,
                                      const Psi0& psi0);

RHSolution solve_problem(const RHProblem& problem);

}  // namespace mch
