#pragma once

// Series kernels over a first-class symmetry group: the quasiautomorphic
// kernel K (Cauchy analogue with K(σ(z),τ)=K(z,τ)+η_σ(τ)), the associated
// differentials η_ν and their periods, and the quasimultiplicative kernel M
// (M(σ(z),τ) = H_σ M(z,τ) + ζ_σ(τ) for a unimodular character H).

#include <vector>

#include "mch/geometry.hpp"

namespace mch {

// Unimodular character of the group, stored by generator: H[nu] is the
// factor of σ_nu = T_nu T_0; H[0] = 1 by convention.
struct CharacterTable {
  std::vector<Cx> H;

  static CharacterTable trivial(std::size_t ncircles) {
    CharacterTable t;
    t.H.assign(ncircles, Cx{1.0, 0.0});
    return t;
  }
  // H of the even reduced word (k1,...,k2m), k1 applied first: the word
  // factors through σ's as Π H_{k_even} / Π H_{k_odd} with H_0 = 1.
  Cx factor_for_word(const GroupWord& w) const;
};

struct KernelContext {
  const GroupEnumeration* group = nullptr;
  Cx star_point = infinity_point();  // z* (kernel K)
  Cx base_point = infinity_point();  // z0 (kernel M)
  int truncation_level = 5;
  double tail_tolerance = 1e-12;
  CharacterTable characters;  // used by M only

  // caches filled by prepare()
  std::vector<Cx> sigma_star;   // σ(z*) per element
  std::vector<Cx> sigma_base;   // σ(z0) per element
  std::vector<Cx> h_inv;        // H_σ^{-1} per element

  void prepare();
  bool prepared() const { return !sigma_star.empty(); }
};

KernelContext make_kernel_context(const GroupEnumeration& group,
                                  int truncation_level = 5,
                                  double tail_tolerance = 1e-12);

struct KernelEval {
  Cx value{0.0, 0.0};
  double tail = 0.0;   // magnitude of the last included level's contribution
  int level_used = 0;
};

// K(z,τ) = Σ_σ [ 1/(τ-σ(z)) - 1/(τ-σ(z*)) ]; summed by level starting at
// truncation_level and extended while the level tail exceeds tail_tolerance.
KernelEval eval_K_detail(const KernelContext& ctx, Cx z, Cx tau);
Cx eval_K(const KernelContext& ctx, Cx z, Cx tau);

// M(z,τ) = Σ_σ H_σ^{-1} [ 1/(τ-σ(z)) - 1/(τ-σ(z0)) ].
KernelEval eval_M_detail(const KernelContext& ctx, Cx z, Cx tau);
Cx eval_M(const KernelContext& ctx, Cx z, Cx tau);

// Generator σ_nu = T_nu T_0 as a Moebius map.
MobiusMap generator_map(const DomainSpec& dom, int nu);

// η_ν(τ) = K(σ_ν(z*), τ) — the first-kind differentials, ν = 1..N.
Cx eval_eta(const KernelContext& ctx, int nu, Cx tau);

// ζ_ν(τ) = M(σ_ν(z0), τ) — the additive shifts of M at the generators.
Cx eval_zeta(const KernelContext& ctx, int nu, Cx tau);

// Period matrix B_{k ν} = (1/2πi) ∫_{T(t_ν1)}^{t_ν1} η_k dτ along a path in
// the fundamental region (radial lift + disk-avoiding polyline, reflected
// into the distinguished disk for the first half). anchor_angles[ν-1] gives
// the angle of t_ν1 on circle ν, ν = 1..N. Returns a dense N x N matrix in
// row-major order.
std::vector<std::vector<Cx>> period_matrix(const KernelContext& ctx,
                                           const std::vector<double>& anchor_angles);

}  // namespace mch
