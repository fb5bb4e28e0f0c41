#include <doctest.h>

#include <cmath>
#include <complex>

#include "mch/canonical.hpp"

using namespace mch;

namespace {
constexpr double kPi = 3.14159265358979323846;

struct Fixture {
  DomainSpec dom;
  CoefficientField field;
  BranchData branch;
  GroupEnumeration group;
  KernelContext ctx;
  ZeroPoleSchedule schedule;
};

// Two marked points on the unit circle, Re(phi)=0 on one arc and Im(phi)=0
// on the other: kappa = 1, alpha = (-3/4, -1/4), l = 1.
Fixture disk_mixed_fixture() {
  Fixture f;
  f.dom.circles = {Circle{{0.0, 0.0}, 1.0}};
  f.dom.validate();
  CirclePartition part;
  part.marked_angles = {0.0, -kPi};
  ArcCoefficients re_arc, im_arc;
  re_arc.a = 1.0;
  re_arc.b = 0.0;
  im_arc.a = 0.0;
  im_arc.b = 1.0;
  part.arcs = {re_arc, im_arc};
  f.field.circles = {part};
  f.field.validate(f.dom);
  f.branch = unwrap_branches(f.dom, f.field, 64);
  f.group = enumerate_group(f.dom, 3);
  f.ctx = make_kernel_context(f.group);
  f.ctx.prepare();
  f.schedule = choose_schedule(f.dom, f.field, f.branch);
  return f;
}

// Two circles; Re(phi)=0 on all of circle 1 (one artificial marked point,
// kappa = alpha = 0) and the mixed two-arc split on circle 0.
Fixture annulus_like_fixture() {
  Fixture f;
  f.dom.circles = {Circle{{0.0, 0.0}, 1.0}, Circle{{3.0, 0.0}, 0.7}};
  f.dom.validate();
  CirclePartition part0;
  part0.marked_angles = {0.0, -kPi};
  ArcCoefficients re_arc, im_arc;
  re_arc.a = 1.0;
  re_arc.b = 0.0;
  im_arc.a = 0.0;
  im_arc.b = 1.0;
  part0.arcs = {re_arc, im_arc};
  CirclePartition part1;
  part1.marked_angles = {0.5};
  part1.arcs = {re_arc};
  f.field.circles = {part0, part1};
  f.field.validate(f.dom);
  f.branch = unwrap_branches(f.dom, f.field, 64);
  f.group = enumerate_group(f.dom, 4);
  f.ctx = make_kernel_context(f.group, 4);
  f.ctx.prepare();
  f.schedule = choose_schedule(f.dom, f.field, f.branch);
  return f;
}
}  // namespace

TEST_CASE("schedule placement stays in the domain") {
  Fixture f = disk_mixed_fixture();
  REQUIRE(f.schedule.circles.size() == 1);
  CHECK(f.schedule.circles[0].points.size() == 1);  // kappa = 1
  CHECK(f.schedule.circles[0].sign == 1);
  for (std::size_t j = 0; j < f.schedule.circles[0].points.size(); ++j) {
    const Cx z = f.schedule.circles[0].points[j];
    CHECK(f.dom.in_domain(z, 1e-6));
    // mirror point lands strictly inside the distinguished disk
    CHECK(f.dom.circles[0].strictly_inside(f.schedule.star_point(f.dom, 0, 0)));
    // connecting path stays in the closed domain
    for (const PathLeg& leg : f.schedule.circles[0].paths[j])
      for (int s = 1; s < 32; ++s)
        CHECK(f.dom.in_domain(leg.point(s / 32.0), -1e-9));
  }
}

TEST_CASE("chi solves the factorization on one circle") {
  Fixture f = disk_mixed_fixture();
  CanonicalFunction chi = build_chi(f.ctx, f.dom, f.field, f.branch, f.schedule);

  // boundary ratio chi+/chi- = p at arc midpoints
  for (int j = 0; j < 2; ++j) {
    const double mid = f.field.circles[0].marked_angles[static_cast<std::size_t>(j)] -
                       0.5 * f.field.circles[0].gap(j);
    const Cx cp = chi.boundary_plus(0, mid);
    const Cx cm = chi.boundary_minus(0, mid);
    const Cx p = f.field.p_at(0, mid);
    CHECK(std::abs(cp / cm - p) < 1e-6);
  }

  // mirror symmetry chi(z) = conj(chi(T0 z)) is exact by construction
  for (Cx z : {Cx{1.7, 0.4}, Cx{-0.3, 2.1}, Cx{2.5, -1.9}}) {
    const Cx mirror = chi.value(reflect(f.dom.circles[0], z));
    CHECK(std::abs(chi.value(z) - std::conj(mirror)) <
          1e-11 * std::abs(chi.value(z)));
  }

  // chi vanishes at the scheduled zero (kappa = 1 > 0)
  const Cx z1 = f.schedule.circles[0].points[0];
  const Cx far = chi.value(Cx{2.0, 2.0});
  CHECK(std::abs(chi.value(z1 + Cx{1e-6, 0.0})) < 1e-4 * std::abs(far));

}

TEST_CASE("product fast path matches quadrature up to a unimodular constant") {
  Fixture f = disk_mixed_fixture();
  CanonicalFunction chi = build_chi(f.ctx, f.dom, f.field, f.branch, f.schedule);
  CanonicalFunction pi = build_pi(f.ctx, f.dom, f.field, f.branch, f.schedule);

  CHECK(std::abs(std::abs(pi.symmetry_constant) - 1.0) < 1e-9);

  // endpoint behaviour: |chi| ~ |z - t|^{2 alpha} near a marked point
  // (checked on the closed-form product, where no quadrature limits it)
  const Cx t = f.dom.circles[0].point(0.0);
  const Cx dir{1.0, 0.0};  // outward normal at theta = 0
  const double r1 = 1e-4, r2 = 2e-4;
  const double slope = std::log(std::abs(pi.value(t + r2 * dir)) /
                                std::abs(pi.value(t + r1 * dir))) /
                       std::log(r2 / r1);
  CHECK(slope == doctest::Approx(2.0 * f.branch.circles[0].alpha[0]).epsilon(0.02));

  const Cx z0{1.9, 0.7};
  const Cx ratio0 = pi.value(z0) / chi.value(z0);
  CHECK(std::abs(std::abs(ratio0) - 1.0) < 1e-5);
  for (Cx z : {Cx{-1.4, 1.2}, Cx{0.3, -2.6}, Cx{4.0, 0.1}}) {
    const Cx ratio = pi.value(z) / chi.value(z);
    CHECK(std::abs(ratio - ratio0) < 1e-5 * std::abs(ratio0));
  }

  // the product's boundary values solve the same jump problem
  for (int j = 0; j < 2; ++j) {
    const double mid = f.field.circles[0].marked_angles[static_cast<std::size_t>(j)] -
                       0.5 * f.field.circles[0].gap(j);
    const Cx cp = pi.boundary_plus(0, mid);
    const Cx cm = pi.boundary_minus(0, mid);
    CHECK(std::abs(cp / cm - f.field.p_at(0, mid)) < 1e-8);
    // and agree with quadrature boundary values up to the same constant
    CHECK(std::abs(cp / chi.boundary_plus(0, mid) - ratio0) <
          1e-5 * std::abs(ratio0));
  }
}

TEST_CASE("characters on a two-circle domain") {
  Fixture f = annulus_like_fixture();
  CanonicalFunction chi = build_chi(f.ctx, f.dom, f.field, f.branch, f.schedule);

  REQUIRE(chi.characters.H.size() == 2);
  CHECK(std::abs(chi.characters.H[0] - Cx{1.0, 0.0}) < 1e-12);
  CHECK(std::abs(std::abs(chi.characters.H[1]) - 1.0) < 1e-12);

  // quasimultiplicativity chi(sigma_1 z) = H_1^{-1} chi(z) away from the
  // probe (H is extracted as chi(z)/chi(sigma z), matching chi- = conj(chi+)/H)
  const MobiusMap s1 = generator_map(f.dom, 1);
  for (Cx z : {Cx{0.0, 2.2}, Cx{1.5, -1.8}}) {
    const Cx lhs = chi.value(s1(z));
    const Cx rhs = chi.value(z) / chi.characters.H[1];
    CHECK(std::abs(lhs - rhs) < 1e-6 * std::abs(rhs));
  }

  // boundary relations on both circles
  for (int nu = 0; nu < 2; ++nu) {
    const CirclePartition& part = f.field.circles[static_cast<std::size_t>(nu)];
    for (int j = 0; j < part.m(); ++j) {
      const double mid = part.marked_angles[static_cast<std::size_t>(j)] -
                         0.5 * part.gap(j);
      const Cx cp = chi.boundary_plus(nu, mid);
      const Cx cm = chi.boundary_minus(nu, mid);
      CHECK(std::abs(cp / cm - f.field.p_at(nu, mid)) < 5e-6);
      const Cx expected = std::conj(cp) / chi.characters.H[static_cast<std::size_t>(nu)];
      CHECK(std::abs(cm - expected) < 5e-6 * std::abs(cp));
    }
  }

  // product-mode characters agree with the quadrature extraction
  CanonicalFunction pi = build_pi(f.ctx, f.dom, f.field, f.branch, f.schedule);
  CHECK(std::abs(pi.characters.H[1] - chi.characters.H[1]) < 1e-5);
}
