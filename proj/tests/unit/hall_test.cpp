#include <doctest.h>

#include <cmath>
#include <complex>

#include "mch/hall.hpp"

using namespace mch;

namespace {
constexpr double kPi = 3.14159265358979323846;

// One circle, two electrodes (top-right and bottom arcs), current J through.
HallPlateSpec disk_two_electrode(double beta = 1.0, double J = 1.0) {
  HallPlateSpec spec;
  spec.domain.circles = {Circle{{0.0, 0.0}, 1.0}};
  CircleElectrodes ce;
  ce.marked_angles = {3.0 * kPi / 4.0, kPi / 4.0, -kPi / 4.0, -3.0 * kPi / 4.0};
  ce.currents = {J, -J};
  spec.circles = {ce};
  spec.resistivity = 1.0;
  spec.hall = beta;
  spec.thickness = 1.0;
  return spec;
}

// Two holes with one electrode each; the current J runs between them.
HallPlateSpec two_hole_single(double beta = 1.0, double J = 1.0) {
  HallPlateSpec spec;
  spec.domain.circles = {Circle{{0.0, 0.0}, 1.0}, Circle{{3.0, 0.0}, 0.8}};
  CircleElectrodes c0, c1;
  c0.marked_angles = {kPi / 2.0, -kPi / 2.0};
  c0.currents = {J};
  c1.marked_angles = {kPi / 2.0, -kPi / 2.0};
  c1.currents = {-J};
  spec.circles = {c0, c1};
  spec.resistivity = 1.0;
  spec.hall = beta;
  spec.thickness = 1.0;
  return spec;
}

double phi_scale(const HallSolution& sol) {
  double s = 0.0;
  for (std::size_t nu = 0; nu < sol.spec.domain.size(); ++nu) {
    const Circle& c = sol.spec.domain.circles[nu];
    for (int k = 0; k < 8; ++k)
      s = std::max(s, std::abs(sol.evaluate(c.center + 1.5 * c.radius *
                                            std::polar(1.0, 2.0 * kPi * k / 8.0))));
  }
  return std::max(s, 1e-12);
}

// Residuals of the two boundary conditions at arc midpoints.
void check_boundary_conditions(const HallSolution& sol, double tol) {
  const double scale = phi_scale(sol);
  for (std::size_t nu = 0; nu < sol.spec.circles.size(); ++nu) {
    const auto& part = sol.field.circles[nu];
    for (int j = 0; j < part.m(); ++j) {
      const double mid = part.marked_angles[static_cast<std::size_t>(j)] - 0.5 * part.gap(j);
      const Cx phi = sol.boundary_value(static_cast<int>(nu), mid);
      const Cx dir = std::polar(1.0, mid);
      if (j % 2 == 0) {
        // electrode: tangential electric field vanishes
        const Cx e = Cx{sol.spec.resistivity, -sol.spec.hall} * std::conj(phi);
        CHECK(std::abs(std::imag(e * std::conj(dir))) / scale < tol);
      } else {
        // dielectric: normal current vanishes
        CHECK(std::abs(std::real(phi * dir)) / scale < tol);
      }
    }
  }
}

// Circulation of the electric field around hole nu, on a circle of the
// given radius in the material. Must vanish for a single-valued potential.
double field_circulation(const HallSolution& sol, std::size_t nu, double radius) {
  const Circle& hole = sol.spec.domain.circles[nu];
  const int n = 512;
  Cx total{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const Cx dir = std::polar(1.0, 2.0 * kPi * i / n);
    const Cx z = hole.center + radius * dir;
    const Cx dz = Cx{0.0, 1.0} * radius * dir * (2.0 * kPi / n);
    total += sol.evaluate(z) * dz;
  }
  return std::real(Cx{sol.spec.resistivity, sol.spec.hall} * total);
}
}  // namespace

TEST_CASE("hall coefficients produce the expected unimodular jumps") {
  const HallPlateSpec spec = disk_two_electrode();
  const CoefficientField jumps = jump_coefficients(spec);
  // dielectric arcs: p = 1; electrode arcs with alpha = beta = 1: p = i
  CHECK(std::abs(jumps.p_at(0, kPi / 2.0) - Cx{0.0, 1.0}) < 1e-14);
  CHECK(std::abs(jumps.p_at(0, 0.0) - Cx{1.0, 0.0}) < 1e-14);
  CHECK(std::abs(jumps.p_at(0, -kPi / 2.0) - Cx{0.0, 1.0}) < 1e-14);

  const CoefficientField full = build_coefficients(spec);
  for (double th : {0.4, 1.2, 2.0, -1.0, -2.4, 3.0}) {
    CHECK(std::abs(std::abs(full.p_at(0, th)) - 1.0) < 1e-14);
    CHECK(std::abs(full.q_at(0, th)) < 1e-14);
  }
  // the full jump is the ratio factor -e^{-2 i theta} times the constant one
  for (double th : {0.4, 2.0, -1.0, -2.4}) {
    const Cx p1 = -std::polar(1.0, -2.0 * th);
    CHECK(std::abs(full.p_at(0, th) - p1 * jumps.p_at(0, th)) < 1e-12);
  }
}

TEST_CASE("winding tables for alpha = beta = 1") {
  // delta* = atan(1)/pi / 2 = 1/8
  const HallPlateSpec spec = disk_two_electrode();
  const BranchData b = hall_parameters(spec);
  REQUIRE(b.circles.size() == 1);
  CHECK(b.circles[0].kappa == 2);
  REQUIRE(b.circles[0].alpha.size() == 4);
  CHECK(b.circles[0].alpha[0] == doctest::Approx(-5.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].alpha[1] == doctest::Approx(-3.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].alpha[2] == doctest::Approx(-1.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].alpha[3] == doctest::Approx(-3.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].l == 1);

  const BranchData b1 = hall_parameters(two_hole_single());
  REQUIRE(b1.circles.size() == 2);
  for (const auto& cb : b1.circles) {
    CHECK(cb.kappa == 1);
    REQUIRE(cb.alpha.size() == 2);
    CHECK(cb.alpha[0] == doctest::Approx(-1.0 / 8.0).epsilon(1e-12));
    CHECK(cb.alpha[1] == doctest::Approx(-3.0 / 8.0).epsilon(1e-12));
    CHECK(cb.l == 0);
  }
}

TEST_CASE("winding tables for the reversed field") {
  const HallPlateSpec spec = disk_two_electrode(-1.0);
  const BranchData b = hall_parameters(spec);
  CHECK(b.circles[0].kappa == 2);
  CHECK(b.circles[0].alpha[0] == doctest::Approx(-7.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].alpha[1] == doctest::Approx(-1.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].alpha[2] == doctest::Approx(-3.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].alpha[3] == doctest::Approx(-1.0 / 8.0).epsilon(1e-12));
  CHECK(b.circles[0].l == 1);

  const BranchData b1 = hall_parameters(two_hole_single(-1.0));
  for (const auto& cb : b1.circles) {
    CHECK(cb.kappa == 1);
    CHECK(cb.alpha[0] == doctest::Approx(-3.0 / 8.0).epsilon(1e-12));
    CHECK(cb.alpha[1] == doctest::Approx(-1.0 / 8.0).epsilon(1e-12));
  }
}

TEST_CASE("combined winding data folds the first-point zero into the tables") {
  {
    const HallPlateSpec spec = disk_two_electrode();
    const CoefficientField field = build_coefficients(spec);
    const BranchData cb = combined_branch(spec, field);
    CHECK(cb.circles[0].kappa == 2);
    CHECK(cb.circles[0].alpha[0] == doctest::Approx(-1.0 / 8.0).epsilon(1e-9));
    CHECK(cb.circles[0].alpha[1] == doctest::Approx(-3.0 / 8.0).epsilon(1e-9));
    CHECK(cb.circles[0].alpha[2] == doctest::Approx(-1.0 / 8.0).epsilon(1e-9));
    CHECK(cb.circles[0].alpha[3] == doctest::Approx(-3.0 / 8.0).epsilon(1e-9));
    CHECK(cb.gamma_exponent() == doctest::Approx(1.0).epsilon(1e-9));
  }
  {
    const HallPlateSpec spec = two_hole_single();
    const CoefficientField field = build_coefficients(spec);
    const BranchData cb = combined_branch(spec, field);
    for (const auto& c : cb.circles) {
      // odd electrode count: the winding parity pushes the first exponent a
      // half turn down, so the circle carries an endpoint condition
      CHECK(c.kappa == 2);
      CHECK(c.l == 1);
      CHECK(c.alpha[0] == doctest::Approx(-5.0 / 8.0).epsilon(1e-9));
      CHECK(c.alpha[1] == doctest::Approx(-3.0 / 8.0).epsilon(1e-9));
    }
    CHECK(cb.gamma_exponent() == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("first factor: simple zeros, symmetry and the one-circle closed form") {
  const HallPlateSpec spec = disk_two_electrode();
  GroupEnumeration group = enumerate_group(spec.domain, 3);
  KernelContext ctx = make_kernel_context(group);
  ctx.prepare();
  const HallChi1 chi1 = build_chi1(ctx, spec);

  const Cx t1 = spec.domain.circles[0].point(spec.circles[0].marked_angles[0]);
  const Cx d0 = spec.domain.circles[0].center;

  // chi1(z) (z - d0) / (z - t1) is a constant: the N = 0 closed form
  Cx ref{0.0, 0.0};
  for (double s : {1.5, 2.5, 4.0}) {
    for (double ang : {0.3, 2.0, -1.7}) {
      const Cx z = d0 + s * std::polar(1.0, ang);
      const Cx v = chi1.value(z) * (z - d0) / (z - t1);
      if (ref == Cx{0.0, 0.0}) ref = v;
      CHECK(std::abs(v - ref) < 1e-6 * std::abs(ref));
    }
  }
  // symmetry chi1(z) = conj(chi1(T0 z))
  for (double s : {1.4, 3.0}) {
    const Cx z = d0 + s * std::polar(1.0, 0.9);
    const Cx zt = reflect(spec.domain.circles[0], z);
    CHECK(std::abs(chi1.value(z) - std::conj(chi1.value(zt))) < 1e-9 * std::abs(chi1.value(z)));
  }
  // simple zero at t1: |chi1| scales linearly with the distance
  const Cx dir = (t1 - d0) / std::abs(t1 - d0);
  const double v1 = std::abs(chi1.value(t1 + 1e-3 * dir));
  const double v2 = std::abs(chi1.value(t1 + 2e-3 * dir));
  CHECK(v2 / v1 == doctest::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("first factor characters match the orbit series") {
  const HallPlateSpec spec = two_hole_single();
  GroupEnumeration group = enumerate_group(spec.domain, 4);
  KernelContext ctx = make_kernel_context(group);
  ctx.prepare();
  const HallChi1 chi1 = build_chi1(ctx, spec);
  const std::vector<Cx> series = chi1_factor_series(ctx, spec);
  REQUIRE(chi1.H1.size() == 2);
  CHECK(std::abs(chi1.H1[0] - Cx{1.0, 0.0}) < 1e-12);
  CHECK(std::abs(std::abs(chi1.H1[1]) - 1.0) < 1e-12);
  // the series fixes the factor up to sign (principal-branch logs)
  CHECK(std::min(std::abs(chi1.H1[1] - series[1]), std::abs(chi1.H1[1] + series[1])) < 1e-4);

  // symmetry in the multiply connected case too
  const Cx z{1.4, 1.1};
  const Cx zt = reflect(spec.domain.circles[0], z);
  CHECK(std::abs(chi1.value(z) - std::conj(chi1.value(zt))) < 1e-8 * std::abs(chi1.value(z)));
}

TEST_CASE("one-circle plate: square system, currents and boundary conditions") {
  const HallPlateSpec spec = disk_two_electrode();
  const HallSolution sol = solve_hall(spec);

  const HallAssembly sys = assemble_hall_system(sol);
  CHECK(sys.A.rows() == 5);
  CHECK(sys.A.cols() == 5);
  REQUIRE(sys.row_labels.size() == 5);
  CHECK(sys.row_labels[0] == "infinity re");
  CHECK(sys.row_labels[2] == "circulation hole 0");

  CHECK(sol.diagnostics.ratio_defect < 1e-6);
  CHECK(sol.diagnostics.residual_norm < 1e-8);

  const double I0 = sol.computed_current(0, 0);
  const double I1 = sol.computed_current(0, 1);
  CHECK(I0 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(I1 == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(std::abs(I0 + I1) < 1e-8);

  check_boundary_conditions(sol, 1e-5);
  CHECK(sol.diagnostics.far_field_variation < 0.05);
  // single-valued potential: E has no circulation (checked away from the
  // radius used by the solver row)
  CHECK(std::abs(field_circulation(sol, 0, 3.0)) < 1e-6);
}

TEST_CASE("two-hole plate: square system, currents and boundary conditions") {
  const HallPlateSpec spec = two_hole_single();
  const HallSolution sol = solve_hall(spec);

  const HallAssembly sys = assemble_hall_system(sol);
  // 1 invariance + 2 infinity + 2 endpoint (odd circles) + 2 circulation
  // + 2 current rows, matching the 2 * (2 + 2) + 1 unknowns
  CHECK(sys.A.rows() == 9);
  CHECK(sys.A.cols() == 9);
  CHECK(sys.row_labels[0] == "invariance circle 1");

  CHECK(sol.diagnostics.ratio_defect < 1e-6);

  const double I0 = sol.computed_current(0, 0);
  const double I1 = sol.computed_current(1, 0);
  CHECK(I0 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(I1 == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(std::abs(I0 + I1) < 1e-8);

  check_boundary_conditions(sol, 1e-5);
  CHECK(sol.diagnostics.far_field_variation < 0.05);
  CHECK(std::abs(field_circulation(sol, 0, 1.9)) < 1e-5);
  CHECK(std::abs(field_circulation(sol, 1, 1.5)) < 1e-5);

  // the joint factorization constant: p conj(chi+)/chi+ = H on every circle
  for (int nu = 0; nu < 2; ++nu) {
    for (double off : {0.35, 0.55}) {
      const double th = spec.circles[static_cast<std::size_t>(nu)].marked_angles[0] - off;
      const Cx cp = sol.chi.boundary_plus(nu, th);
      const Cx ratio = sol.field.p_at(nu, th) * std::conj(cp) / cp;
      CHECK(std::abs(ratio - sol.chi.characters.H[static_cast<std::size_t>(nu)]) < 1e-6);
    }
  }
}

TEST_CASE("zero prescribed currents give the zero field") {
  HallPlateSpec spec = disk_two_electrode(1.0, 0.0);
  const HallSolution sol = solve_hall(spec);
  CHECK(std::abs(sol.C0) < 1e-10);
  for (Cx c : sol.C) CHECK(std::abs(c) < 1e-10);
  CHECK(std::abs(sol.evaluate(Cx{2.0, 1.0})) < 1e-10);
}

TEST_CASE("field reverses with the magnetic field: mirror symmetry") {
  const HallPlateSpec spec = disk_two_electrode(1.0);
  HallPlateSpec mirror = disk_two_electrode(-1.0);
  // conjugated electrode layout: angles negated, clockwise order restored
  mirror.circles[0].marked_angles = {-kPi / 4.0, -3.0 * kPi / 4.0, 3.0 * kPi / 4.0, kPi / 4.0};
  mirror.circles[0].currents = spec.circles[0].currents;

  const HallSolution a = solve_hall(spec);
  const HallSolution b = solve_hall(mirror);
  const double scale = phi_scale(a);
  for (Cx z : {Cx{1.8, 0.7}, Cx{-0.4, 2.1}, Cx{0.1, -1.6}}) {
    // Phi_mirror(conj z) = conj(Phi(z))
    CHECK(std::abs(b.evaluate(std::conj(z)) - std::conj(a.evaluate(z))) / scale < 1e-5);
  }
}

TEST_CASE("invalid plate specs are rejected") {
  HallPlateSpec spec = disk_two_electrode();
  spec.circles[0].currents = {1.0, -0.5};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = disk_two_electrode();
  spec.circles[0].marked_angles[1] = spec.circles[0].marked_angles[0];
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = disk_two_electrode();
  spec.hall = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  // odd-electrode circle listed before an even one
  HallPlateSpec two = two_hole_single();
  CircleElectrodes even;
  even.marked_angles = {3.0 * kPi / 4.0, kPi / 4.0, -kPi / 4.0, -3.0 * kPi / 4.0};
  even.currents = {0.5, -0.5};
  two.domain.circles.push_back(Circle{{-3.0, 0.0}, 0.8});
  two.circles.push_back(even);
  CHECK_THROWS_AS(two.validate(), std::invalid_argument);
}
