#include <doctest.h>

#include <cmath>

#include "mch/geometry.hpp"

using namespace mch;

namespace {
DomainSpec two_hole_domain() {
  DomainSpec dom;
  dom.circles = {{{0.0, 0.0}, 1.0}, {{4.0, 0.0}, 0.8}, {{0.5, 4.5}, 1.2}};
  dom.validate();
  return dom;
}
}  // namespace

TEST_CASE("reflection is an involution fixing the circle") {
  Circle c{{1.0, -2.0}, 1.7};
  const Cx z{3.2, 0.4};
  CHECK(std::abs(reflect(c, reflect(c, z)) - z) < 1e-13);
  const Cx t = c.point(0.83);
  CHECK(std::abs(reflect(c, t) - t) < 1e-13);
  CHECK(is_infinite(reflect(c, c.center)));
  CHECK(std::abs(reflect(c, infinity_point()) - c.center) < 1e-13);
}

TEST_CASE("composed even words match pointwise reflection") {
  const DomainSpec dom = two_hole_domain();
  const GroupWord w{0, 1, 2, 1};
  const MobiusMap m = compose_word(dom, w);
  for (Cx z : {Cx{2.0, 1.0}, Cx{-3.0, 0.3}, Cx{0.1, -5.0}}) {
    CHECK(std::abs(m(z) - apply_word(dom, w, z)) < 1e-10);
  }
  CHECK(std::abs(m.det() - Cx{1.0, 0.0}) < 1e-10);
}

TEST_CASE("odd or non-reduced words are rejected") {
  const DomainSpec dom = two_hole_domain();
  CHECK_THROWS(compose_word(dom, GroupWord{0}));
  CHECK_THROWS(compose_word(dom, GroupWord{1, 1}));
}

TEST_CASE("group enumeration counts (N+1)N^(2mu-1) words per level") {
  const DomainSpec dom = two_hole_domain();
  const GroupEnumeration g = enumerate_group(dom, 3);
  CHECK(g.elements.size() == 1 + 6 + 24 + 96);
  CHECK(g.level_begin(0) == 0);
  CHECK(g.level_end(0) == 1);
  CHECK(g.level_end(1) - g.level_begin(1) == 6);
  CHECK(g.level_end(2) - g.level_begin(2) == 24);
  CHECK(g.level_end(3) - g.level_begin(3) == 96);
  // identity first
  CHECK(g.elements[0].word.empty());
  // all words reduced and of even length 2*level
  for (const auto& el : g.elements) {
    CHECK(is_reduced(el.word));
    CHECK(el.word.size() == 2 * static_cast<std::size_t>(el.level));
  }
}

TEST_CASE("well separated disks pass the first-class heuristic") {
  const DomainSpec dom = two_hole_domain();
  const GroupEnumeration g = enumerate_group(dom, 3);
  const FirstClassReport rep = first_class_check(g);
  CHECK(rep.plausibly_first_class);
  CHECK(rep.max_ratio < 1.0);
}

TEST_CASE("overlapping disks are rejected") {
  DomainSpec dom;
  dom.circles = {{{0.0, 0.0}, 1.0}, {{1.5, 0.0}, 1.0}};
  CHECK_THROWS_AS(dom.validate(), std::invalid_argument);
}

TEST_CASE("domain membership") {
  const DomainSpec dom = two_hole_domain();
  CHECK(dom.in_domain(Cx{2.0, 1.0}));
  CHECK(dom.in_domain(infinity_point()));
  CHECK(!dom.in_domain(Cx{0.1, 0.1}));
  CHECK(dom.disk_containing(Cx{4.1, 0.0}) == 1);
  CHECK(dom.disk_containing(Cx{2.0, 1.0}) == -1);
  // fundamental region: D plus the reflection of D in circle 0
  const Cx inside0 = reflect(dom.circles[0], Cx{2.0, 1.0});
  CHECK(dom.in_fundamental_region(inside0));
}
