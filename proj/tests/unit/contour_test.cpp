#include <doctest.h>

#include <cmath>
#include <complex>

#include "mch/contour.hpp"

using namespace mch;

namespace {
constexpr double kPi = 3.14159265358979323846;

DomainSpec one_circle() {
  DomainSpec dom;
  dom.circles = {{{0.0, 0.0}, 1.0}};
  dom.validate();
  return dom;
}
}  // namespace

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(8, x, w);
  double s = 0.0, s6 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i];
    s6 += w[i] * std::pow(x[i], 6);
  }
  CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s6 == doctest::Approx(2.0 / 7.0).epsilon(1e-13));
}

TEST_CASE("arc quadrature reproduces residues counterclockwise") {
  const Circle c{{1.0, 1.0}, 2.0};
  const Arc full{0, 0.0, 2.0 * kPi};
  QuadratureRule r;
  const Cx inside{1.3, 0.5};
  const Cx outside{5.0, 5.0};
  const Cx in_val = integrate_arc(c, full, r, [&](Cx t) { return 1.0 / (t - inside); });
  const Cx out_val = integrate_arc(c, full, r, [&](Cx t) { return 1.0 / (t - outside); });
  CHECK(std::abs(in_val - Cx{0.0, 2.0 * kPi}) < 1e-10);
  CHECK(std::abs(out_val) < 1e-10);
}

TEST_CASE("path legs integrate exact derivatives") {
  // ∫ 2z dz along any path = b^2 - a^2
  const Cx a{0.0, 0.0}, b{2.0, 1.0};
  const auto leg = segment_leg(a, b);
  const Cx v = integrate_leg(leg, 4, 12, [](Cx z) { return 2.0 * z; });
  CHECK(std::abs(v - b * b) < 1e-12);

  const auto arc = circular_leg(Cx{0.0, 0.0}, 1.5, 0.2, 1.9);
  const Cx va = integrate_leg(arc, 4, 12, [](Cx z) { return 2.0 * z; });
  const Cx za = 1.5 * std::polar(1.0, 0.2), zb = 1.5 * std::polar(1.0, 1.9);
  CHECK(std::abs(va - (zb * zb - za * za)) < 1e-12);
}

TEST_CASE("avoiding polyline clears the disks") {
  DomainSpec dom;
  dom.circles = {{{0.0, 0.0}, 1.0}, {{3.0, 0.0}, 0.7}};
  dom.validate();
  const auto way = avoiding_polyline(dom, Cx{-3.0, 0.01}, Cx{6.0, 0.01});
  REQUIRE(way.size() >= 2);
  for (std::size_t i = 0; i + 1 < way.size(); ++i) {
    for (int s = 1; s < 40; ++s) {
      const Cx z = way[i] + (way[i + 1] - way[i]) * (s / 40.0);
      CHECK(dom.in_domain(z, 0.0));
    }
  }
}

TEST_CASE("cauchy boundary limits satisfy the Plemelj jump") {
  const DomainSpec dom = one_circle();
  QuadratureRule r;
  const std::vector<std::vector<Arc>> arcs{{Arc{0, 0.0, 2.0 * kPi}}};
  const BoundaryGrid grid = build_boundary_grid(dom, arcs, r);
  // density g(tau) = real+imag polynomial, smooth on the circle
  std::vector<Cx> g(grid.size());
  auto gf = [](Cx t) { return Cx{0.3, 0.0} + 0.2 * t + Cx{0.0, 0.1} * t * t; };
  for (std::size_t i = 0; i < grid.size(); ++i) g[i] = gf(grid.nodes[i].tau);
  auto kernel = [](Cx z, Cx t) { return 1.0 / (t - z); };

  const double theta = 1.1;
  const Cx t0 = dom.circles[0].point(theta);
  const Cx fp = cauchy_boundary_limit(grid, kernel, g, 0, theta, gf(t0), Side::plus);
  const Cx fm = cauchy_boundary_limit(grid, kernel, g, 0, theta, gf(t0), Side::minus);
  CHECK(std::abs(fp - fm - gf(t0)) < 1e-9);

  // interior limit of the Cauchy integral of a polynomial density equals
  // the polynomial part analytic inside: for g above, F+ = g (g analytic).
  CHECK(std::abs(fp - gf(t0)) < 1e-9);
  CHECK(std::abs(fm) < 1e-9);

  // offset-limit cross-check: an ungraded, denser grid keeps the interior
  // quadrature accurate down to the smallest extrapolation offset
  QuadratureRule uniform;
  uniform.panels_per_arc = 32;
  uniform.endpoint_grading = 1.0;
  const BoundaryGrid grid2 = build_boundary_grid(dom, arcs, uniform);
  std::vector<Cx> g2(grid2.size());
  for (std::size_t i = 0; i < grid2.size(); ++i) g2[i] = gf(grid2.nodes[i].tau);
  const Cx fp2 = cauchy_offset_limit(grid2, kernel, g2, 0, theta, Side::plus, 0.4);
  CHECK(std::abs(fp2 - fp) < 1e-6);
}
