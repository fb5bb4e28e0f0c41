#include "mch/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "mch/contour.hpp"

namespace mch {

Cx CharacterTable::factor_for_word(const GroupWord& w) const {
  Cx num{1.0, 0.0}, den{1.0, 0.0};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Cx h = H.at(static_cast<std::size_t>(w[i]));
    if (i % 2 == 1) {
      num *= h;
    } else {
      den *= h;
    }
  }
  return num / den;
}

void KernelContext::prepare() {
  if (group == nullptr) throw std::invalid_argument("kernel context: no group");
  if (characters.H.empty())
    characters = CharacterTable::trivial(group->domain.circles.size());
  const std::size_t n = group->elements.size();
  sigma_star.resize(n);
  sigma_base.resize(n);
  h_inv.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& el = group->elements[i];
    sigma_star[i] = el.map(star_point);
    sigma_base[i] = el.map(base_point);
    h_inv[i] = Cx{1.0, 0.0} / characters.factor_for_word(el.word);
  }
}

KernelContext make_kernel_context(const GroupEnumeration& group,
                                  int truncation_level, double tail_tolerance) {
  KernelContext ctx;
  ctx.group = &group;
  ctx.truncation_level = truncation_level;
  ctx.tail_tolerance = tail_tolerance;
  ctx.characters = CharacterTable::trivial(group.domain.circles.size());
  ctx.prepare();
  return ctx;
}

namespace {

inline Cx pole_term(Cx tau, Cx pole) {
  if (is_infinite(pole)) return {0.0, 0.0};
  return 1.0 / (tau - pole);
}

template <bool WithCharacters>
KernelEval eval_series(const KernelContext& ctx, Cx z, Cx tau) {
  if (!ctx.prepared()) throw std::logic_error("kernel context not prepared");
  const auto& g = *ctx.group;
  const Cx ref = WithCharacters ? ctx.base_point : ctx.star_point;
  const auto& ref_cache = WithCharacters ? ctx.sigma_base : ctx.sigma_star;
  (void)ref;
  KernelEval out;
  int level = 0;
  for (; level <= g.max_level; ++level) {
    Cx level_sum{0.0, 0.0};
    for (std::size_t i = g.level_begin(level); i < g.level_end(level); ++i) {
      const Cx sz = g.elements[i].map(z);
      Cx term = pole_term(tau, sz) - pole_term(tau, ref_cache[i]);
      if constexpr (WithCharacters) term *= ctx.h_inv[i];
      level_sum += term;
    }
    out.value += level_sum;
    out.tail = std::abs(level_sum);
    out.level_used = level;
    if (level >= ctx.truncation_level && out.tail < ctx.tail_tolerance) break;
  }
  return out;
}

}  // namespace

KernelEval eval_K_detail(const KernelContext& ctx, Cx z, Cx tau) {
  return eval_series<false>(ctx, z, tau);
}
Cx eval_K(const KernelContext& ctx, Cx z, Cx tau) {
  return eval_series<false>(ctx, z, tau).value;
}
KernelEval eval_M_detail(const KernelContext& ctx, Cx z, Cx tau) {
  return eval_series<true>(ctx, z, tau);
}
Cx eval_M(const KernelContext& ctx, Cx z, Cx tau) {
  return eval_series<true>(ctx, z, tau).value;
}

MobiusMap generator_map(const DomainSpec& dom, int nu) {
  return compose_word(dom, GroupWord{0, nu});
}

Cx eval_eta(const KernelContext& ctx, int nu, Cx tau) {
  const MobiusMap s = generator_map(ctx.group->domain, nu);
  return eval_K(ctx, s(ctx.star_point), tau);
}

Cx eval_zeta(const KernelContext& ctx, int nu, Cx tau) {
  const MobiusMap s = generator_map(ctx.group->domain, nu);
  return eval_M(ctx, s(ctx.base_point), tau);
}

namespace {

PathLeg reversed_leg(const PathLeg& leg) {
  PathLeg out;
  auto p = leg.point;
  auto v = leg.velocity;
  out.point = [p](double s) { return p(1.0 - s); };
  out.velocity = [v](double s) { return -v(1.0 - s); };
  out.length_hint = leg.length_hint;
  return out;
}

}  // namespace

std::vector<std::vector<Cx>> period_matrix(const KernelContext& ctx,
                                           const std::vector<double>& anchor_angles) {
  const DomainSpec& dom = ctx.group->domain;
  const int N = dom.holes();
  if (static_cast<int>(anchor_angles.size()) != N)
    throw std::invalid_argument("period_matrix: need one anchor angle per hole");
  constexpr double kLift = 0.3;  // radial lift factor off the circles

  std::vector<std::vector<Cx>> B(static_cast<std::size_t>(N),
                                 std::vector<Cx>(static_cast<std::size_t>(N)));
  for (int nu = 1; nu <= N; ++nu) {
    const Circle& cnu = dom.circles[static_cast<std::size_t>(nu)];
    const Circle& c0 = dom.circles[0];
    const Cx t = cnu.point(anchor_angles[static_cast<std::size_t>(nu - 1)]);
    // Exterior path P: t -> radial lift u -> (avoiding polyline) -> lift over
    // the anchor w on L_0 -> w. The full integration path is T_0(P) followed
    // by the reverse of P, running from T_0(t) to t inside the fundamental
    // region.
    const Cx u = cnu.center + (t - cnu.center) * (1.0 + kLift);
    const Cx wdir = (t - c0.center) / std::abs(t - c0.center);
    const Cx w = c0.center + c0.radius * wdir;
    const Cx u0 = c0.center + c0.radius * (1.0 + kLift) * wdir;

    std::vector<PathLeg> exterior;
    exterior.push_back(segment_leg(t, u));
    for (auto& leg : polyline_legs(avoiding_polyline(dom, u, u0, 0.1)))
      exterior.push_back(std::move(leg));
    exterior.push_back(segment_leg(u0, w));

    std::vector<PathLeg> path;
    for (const auto& leg : exterior) path.push_back(reflected_leg(c0, leg));
    for (auto it = exterior.rbegin(); it != exterior.rend(); ++it)
      path.push_back(reversed_leg(*it));

    for (int k = 1; k <= N; ++k) {
      const Cx zk = generator_map(dom, k)(ctx.star_point);
      const Cx val = integrate_path(path, 10, 16, [&](Cx tau) {
        return eval_K(ctx, zk, tau);
      });
      B[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(nu - 1)] =
          val / Cx(0.0, 2.0 * 3.14159265358979323846);
    }
  }
  return B;
}

}  // namespace mch
