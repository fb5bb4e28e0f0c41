#pragma once

// The multiplicative canonical function χ of the factorization χ⁺ = p·χ⁻:
// a quadrature construction χ = exp{Γ(z) + conj(Γ(T₀(z)))} built from the
// branch data of arg p, and a closed-form orbit-product fast path for
// piecewise-constant coefficients. Characters H_ν are extracted from the
// defect ratio χ(z)/χ(σ_ν(z)) at a fixed probe point.

#include <memory>
#include <vector>

#include "mch/boundary.hpp"
#include "mch/contour.hpp"
#include "mch/geometry.hpp"
#include "mch/kernels.hpp"

namespace mch {

// Zero/pole points z_νj (j = 1..|κ_ν|) near circle ν together with the
// connecting paths γ_νj from the first marked point t_ν1 to z_νj. The paths
// stay in D and are pairwise non-crossing (hook construction: a shared
// radial launch, per-path collar arcs at distinct radii, inward drops).
struct ZeroPoleSchedule {
  struct CircleEntry {
    std::vector<Cx> points;                      // z_νj
    std::vector<std::vector<PathLeg>> paths;     // γ_νj, from t_ν1
    int sign = 0;                                // sgn κ_ν
  };
  std::vector<CircleEntry> circles;  // size N+1; empty points when κ_ν = 0

  bool empty() const {
    for (const auto& c : circles)
      if (!c.points.empty()) return false;
    return true;
  }
  // z*_νj = T₀(z_νj), the mirror zeros/poles inside the distinguished disk.
  Cx star_point(const DomainSpec& dom, int nu, int j) const;
};

// Placement: |κ_ν| points in the collar of circle ν at equispaced angles
// (offset away from marked points), margin shrunk from the default when a
// neighboring disk intrudes. Throws std::runtime_error when no admissible
// placement exists.
ZeroPoleSchedule choose_schedule(const DomainSpec& dom,
                                 const CoefficientField& field,
                                 const BranchData& branch,
                                 double margin = 0.35);

// Γ(z) = (1/2πi)∮_L g(τ)K(z,τ)dτ + Σ_ν sgn κ_ν Σ_j ∫_{γ_νj} K(z,τ)dτ with
// g = -(i/2)·arg p and the contour quadrature running counterclockwise
// (the factorization's positive direction is clockwise, hence the sign
// folded into g). Near a marked point, Γ(z) ~ α_νj·ln(z - t_νj) + bounded.
struct GammaFunction {
  const KernelContext* ctx = nullptr;
  DomainSpec domain;
  CoefficientField field;
  BranchData branch;
  BoundaryGrid grid;
  std::vector<Cx> density;  // g at the grid nodes
  ZeroPoleSchedule schedule;
  int path_panels = 10;
  int path_nodes = 16;

  // z off L and off the schedule paths.
  Cx operator()(Cx z) const;
  // One-sided limit at t = (circle, theta): domain_side=true gives the limit
  // from D (the "+" side of the factorization), false from inside the disk.
  Cx boundary(int circle, double theta, bool domain_side) const;

  Cx path_term(Cx z) const;
};

GammaFunction build_gamma(const KernelContext& ctx, const DomainSpec& dom,
                          const CoefficientField& field, const BranchData& branch,
                          const ZeroPoleSchedule& schedule,
                          const QuadratureRule& rule = QuadratureRule{});

enum class CanonicalMode { quadrature, product };

class CanonicalFunction {
 public:
  CanonicalMode mode = CanonicalMode::quadrature;
  const KernelContext* ctx = nullptr;
  DomainSpec domain;
  CharacterTable characters;    // H_ν, probe-ratio extraction; H[0] = 1
  std::vector<Cx> h;            // quadrature mode: h_ν = Γ(σ_ν(z*)), h[0] = 0
  Cx probe_point;               // where the characters were measured
  Cx symmetry_constant{1.0, 0.0};  // conj(χ(T₀ z))/χ(z) defect (recorded)

  // χ(z). Quadrature mode: any z off L and off the schedule paths (defined
  // on both sides of L). Product mode: z in the closure of D, plus the
  // probe images σ_ν(z_probe) reached by explicit continuation.
  Cx value(Cx z) const;

  // One-sided boundary values at arc interiors: χ⁺ from the domain D,
  // χ⁻ from inside the disk; χ⁺ = p·χ⁻ and χ⁻ = H_ν^{-1}·conj(χ⁺).
  Cx boundary_plus(int circle, double theta) const;
  Cx boundary_minus(int circle, double theta) const;

  const GammaFunction& gamma() const;  // quadrature mode only

  // internal state, exposed for tests
  struct ProductState;
  std::shared_ptr<GammaFunction> gamma_;
  std::shared_ptr<ProductState> product_;
};

// Quadrature-mode construction; exact T₀-symmetry χ(z) = conj(χ(T₀(z))).
CanonicalFunction build_chi(const KernelContext& ctx, const DomainSpec& dom,
                            const CoefficientField& field, const BranchData& branch,
                            const ZeroPoleSchedule& schedule,
                            const QuadratureRule& rule = QuadratureRule{});

// Piecewise-constant fast path: the orbit product
//   Π(z) = Π_σ Π_ν [ Π_j ((σ(t_νj)-z)²/(δ₀-σ(t_νj)))^{α_νj}
//                    Π_j ((z-σ(z_νj))(z-σ(z*_νj))/(δ₀-σ(z*_νj)))^{sgn κ_ν} ],
// evaluated through a continued logarithm along a branch-point-avoiding path
// from a far reference point (per-factor principal ratio steps). Agrees with
// build_chi up to a unimodular constant.
CanonicalFunction build_pi(const KernelContext& ctx, const DomainSpec& dom,
                           const CoefficientField& field, const BranchData& branch,
                           const ZeroPoleSchedule& schedule);

}  // namespace mch
