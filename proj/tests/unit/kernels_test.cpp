#include <doctest.h>

#include <cmath>

#include "mch/contour.hpp"
#include "mch/kernels.hpp"

using namespace mch;

namespace {
constexpr double kPi = 3.14159265358979323846;

DomainSpec two_hole_domain() {
  DomainSpec dom;
  dom.circles = {{{0.0, 0.0}, 1.0}, {{4.0, 0.0}, 0.8}, {{0.5, 4.5}, 1.2}};
  dom.validate();
  return dom;
}
}  // namespace

TEST_CASE("K behaves as a Cauchy kernel with group corrections") {
  const DomainSpec dom = two_hole_domain();
  const GroupEnumeration g = enumerate_group(dom, 4);
  KernelContext ctx = make_kernel_context(g, 3, 1e-12);

  const Cx z{2.0, 1.5}, tau{-2.0, 2.0};
  // leading singularity: K(z,tau) - 1/(tau-z) is bounded as tau -> z
  const Cx k1 = eval_K(ctx, z, z + Cx{1e-6, 0.0});
  CHECK(std::abs(k1 - 1e6) < 1e3);  // 1/(tau-z) = 1e6 dominates
  // K(z*, tau) = 0 for the star point at infinity
  CHECK(std::abs(eval_K(ctx, infinity_point(), tau)) < 1e-14);
}

TEST_CASE("eta differentials have unit a-periods over their own hole") {
  const DomainSpec dom = two_hole_domain();
  const GroupEnumeration g = enumerate_group(dom, 4);
  KernelContext ctx = make_kernel_context(g, 4, 1e-13);
  QuadratureRule r;
  for (int nu = 1; nu <= 2; ++nu) {
    for (int k = 1; k <= 2; ++k) {
      const Arc full{k, 0.0, 2.0 * kPi};
      const Cx period = integrate_arc(dom.circles[static_cast<std::size_t>(k)], full, r,
                                      [&](Cx t) { return eval_eta(ctx, nu, t); }) /
                        Cx{0.0, 2.0 * kPi};
      const double expected = (k == nu) ? 1.0 : 0.0;
      CHECK(std::abs(period - expected) < 2e-6);
    }
  }
}

TEST_CASE("M kernel is quasimultiplicative with the given characters") {
  const DomainSpec dom = two_hole_domain();
  const GroupEnumeration g = enumerate_group(dom, 4);
  KernelContext ctx = make_kernel_context(g, 3, 1e-13);
  ctx.characters.H = {Cx{1.0, 0.0}, std::polar(1.0, 0.7), std::polar(1.0, -1.3)};
  ctx.prepare();

  const Cx tau{-2.0, 2.5};
  const Cx z{1.8, 1.1};
  for (int k = 1; k <= 2; ++k) {
    const MobiusMap sig = generator_map(dom, k);
    const Cx lhs = eval_M(ctx, sig(z), tau);
    const Cx rhs = ctx.characters.H[static_cast<std::size_t>(k)] * eval_M(ctx, z, tau) +
                   eval_zeta(ctx, k, tau);
    CHECK(std::abs(lhs - rhs) < 5e-7);
  }
}

TEST_CASE("character factors multiply along words") {
  CharacterTable t;
  t.H = {Cx{1.0, 0.0}, std::polar(1.0, 0.4), std::polar(1.0, 1.1)};
  // word (0, nu), first letter applied first => generator sigma_nu
  CHECK(std::abs(t.factor_for_word({0, 1}) - t.H[1]) < 1e-15);
  CHECK(std::abs(t.factor_for_word({1, 0}) - 1.0 / t.H[1]) < 1e-15);
  // sigma_2^{-1} sigma_1 as the word (0,1,2,0): T_0 T_2 T_1 T_0
  const Cx f = t.factor_for_word({0, 1, 2, 0});
  CHECK(std::abs(f - t.H[1] / t.H[2]) < 1e-14);
}

TEST_CASE("period matrix has positive-definite imaginary part") {
  const DomainSpec dom = two_hole_domain();
  const GroupEnumeration g = enumerate_group(dom, 4);
  KernelContext ctx = make_kernel_context(g, 4, 1e-13);
  const auto B = period_matrix(ctx, {0.3, 1.2});
  REQUIRE(B.size() == 2);
  // symmetric within tolerance
  CHECK(std::abs(B[0][1] - B[1][0]) < 5e-5);
  // Im B positive definite (2x2 leading minors)
  const double a = B[0][0].imag(), d = B[1][1].imag();
  const double bo = 0.5 * (B[0][1].imag() + B[1][0].imag());
  CHECK(a > 0.0);
  CHECK(a * d - bo * bo > 0.0);
}
