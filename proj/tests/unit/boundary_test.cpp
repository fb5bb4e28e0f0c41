#include <doctest.h>

#include <cmath>

#include "mch/boundary.hpp"

using namespace mch;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Alternating mixed prescription on one circle with 2n marked points:
// arcs 1,3,5,... carry Re(phi)=0 (a=1,b=0), arcs 2,4,... carry Im(phi)=0
// (a=0,b=1). Marked points listed in clockwise order.
CirclePartition alternating_partition(int m) {
  CirclePartition part;
  for (int j = 0; j < m; ++j) {
    part.marked_angles.push_back(-2.0 * kPi * j / m);
    ArcCoefficients ac;
    if (j % 2 == 0) {
      ac.a = 1.0;
      ac.b = 0.0;
    } else {
      ac.a = 0.0;
      ac.b = 1.0;
    }
    ac.c = 0.0;
    part.arcs.push_back(ac);
  }
  return part;
}

DomainSpec unit_disk_domain() {
  DomainSpec dom;
  dom.circles = {Circle{{0.0, 0.0}, 1.0}};
  dom.validate();
  return dom;
}
}  // namespace

TEST_CASE("p,q transform") {
  CoefficientField field;
  CirclePartition part;
  part.marked_angles = {0.0};
  ArcCoefficients ac;
  ac.a = 1.0;
  ac.b = 0.0;
  ac.c = 2.0;
  part.arcs = {ac};
  field.circles = {part};
  Cx p, q;
  field.p_q(0, 1.0, p, q);
  CHECK(std::abs(p - Cx{-1.0, 0.0}) < 1e-15);  // Re phi = c  =>  p = -1
  CHECK(std::abs(q - Cx{4.0, 0.0}) < 1e-15);
  // Im phi = c  =>  p = +1
  field.circles[0].arcs[0].a = 0.0;
  field.circles[0].arcs[0].b = 1.0;
  field.p_q(0, 1.0, p, q);
  CHECK(std::abs(p - Cx{1.0, 0.0}) < 1e-14);
  CHECK(std::abs(q - Cx{0.0, 4.0}) < 1e-14);
}

TEST_CASE("alternating mixed problem: winding and exponents") {
  // One circle, m = 2n marked points. Expected: unwrapped arg p at the arc
  // starts climbs as pi, 2pi, 3pi, ..., kappa = [(n+1)/2],
  // alpha_1 = -3/4 (n odd) or -1/4 (n even), alpha_j = -1/4 otherwise,
  // and the circle contributes n to the total index.
  const DomainSpec dom = unit_disk_domain();
  for (int n = 1; n <= 4; ++n) {
    CoefficientField field;
    field.circles = {alternating_partition(2 * n)};
    const BranchData branch = unwrap_branches(dom, field, 64);
    const CircleBranch& cb = branch.circles[0];
    CHECK(cb.kappa == (n + 1) / 2);
    const double a1 = (n % 2 == 1) ? -0.75 : -0.25;
    CHECK(cb.alpha[0] == doctest::Approx(a1).epsilon(1e-12));
    for (int j = 1; j < 2 * n; ++j)
      CHECK(cb.alpha[static_cast<std::size_t>(j)] ==
            doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(cb.l == ((n % 2 == 1) ? 1 : 0));
    CHECK(branch.total_index() == n);
    for (int j = 0; j < 2 * n; ++j)
      CHECK(cb.argp_start[static_cast<std::size_t>(j)] ==
            doctest::Approx(kPi * (j + 1)).epsilon(1e-10));
    CHECK(branch.gamma_exponent() == doctest::Approx(0.0).epsilon(1e-10));
    // branch-resolved arg p mid-arc stays on the unwrapped sheet
    const CirclePartition& part = field.circles[0];
    for (int j = 0; j < 2 * n; ++j) {
      const double mid = part.marked_angles[static_cast<std::size_t>(j)] -
                         0.5 * part.gap(j);
      const double v = argp_value(field, branch, 0, j, mid);
      CHECK(v == doctest::Approx(cb.argp_start[static_cast<std::size_t>(j)])
                     .epsilon(1e-10));
    }
  }
}

TEST_CASE("smooth winding coefficients give negative kappa") {
  // a+ib = exp(i theta): along the clockwise traversal arg p decreases by
  // 4 pi over one loop, so kappa = -1 and alpha_1 = 0.
  const DomainSpec dom = unit_disk_domain();
  CoefficientField field;
  CirclePartition part;
  part.marked_angles = {0.0};
  ArcCoefficients ac;
  ac.fa = [](double th) { return std::cos(th); };
  ac.fb = [](double th) { return std::sin(th); };
  ac.fc = [](double) { return 0.0; };
  part.arcs = {ac};
  field.circles = {part};
  const BranchData branch = unwrap_branches(dom, field, 720);
  CHECK(branch.circles[0].kappa == -1);
  CHECK(branch.circles[0].alpha[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(branch.circles[0].l == 0);
  CHECK(branch.total_index() == -2);
}

TEST_CASE("index regimes") {
  BranchData b;
  b.circles.resize(2);
  b.circles[0].kappa = -1;
  b.circles[0].l = 0;
  b.circles[1].kappa = 0;
  b.circles[1].l = 0;
  IndexReport r = index_report(b, 1);
  CHECK(r.regime == IndexRegime::negative);
  CHECK(r.index == -2);
  CHECK(r.solvability_conditions == 1 - (-2) - 1);
  CHECK(r.family_dimension_bound == 0);
  CHECK(r.family_dimension_exact);

  b.circles[0].kappa = 2;
  b.circles[1].kappa = 1;
  b.circles[1].l = 1;
  r = index_report(b, 1);
  CHECK(r.index == 5);
  CHECK(r.regime == IndexRegime::large);
  CHECK(r.family_dimension_bound == 5 - 1 + 1);
  CHECK(r.family_dimension_exact);

  b.circles[0].kappa = 1;
  b.circles[0].l = 1;
  b.circles[1].kappa = 0;
  b.circles[1].l = 1;
  r = index_report(b, 3);  // pretend N=3: 0 <= K=0 <= 2N-2
  CHECK(r.index == 0);
  CHECK(r.regime == IndexRegime::intermediate);
  CHECK_FALSE(r.family_dimension_exact);
}
