#pragma once

// Hall-plate problem on an unbounded plate with circular holes: each hole
// boundary carries alternating electrode / dielectric arcs, the electrodes
// feed prescribed net currents, and a uniform magnetic field enters through
// the Hall parameter beta. Solved for the complex current density
// Phi = J_x - i J_y via the two-factor canonical function chi1 * chi2 and a
// square real system for the representation constants.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "mch/boundary.hpp"
#include "mch/canonical.hpp"
#include "mch/contour.hpp"
#include "mch/geometry.hpp"
#include "mch/kernels.hpp"

namespace mch {

struct CircleElectrodes {
  // 2n marked angles in positive (clockwise) order. The arc from
  // marked_angles[2j] to marked_angles[2j+1] (clockwise) is electrode j,
  // the following arc is dielectric.
  std::vector<double> marked_angles;
  // Net current per electrode (amps); positive flows from the plate into
  // the electrode. Must sum to zero over the whole spec.
  std::vector<double> currents;

  int electrode_count() const { return static_cast<int>(currents.size()); }
};

struct HallPlateSpec {
  DomainSpec domain;
  std::vector<CircleElectrodes> circles;  // one entry per domain circle
  double thickness = 1.0;    // plate thickness h0 > 0
  double resistivity = 1.0;  // alpha > 0
  double hall = 1.0;         // beta = H_z * R_H, nonzero

  // Checks geometry, arc alternation, the even-then-odd circle ordering,
  // current balance and parameter signs; throws std::invalid_argument.
  void validate() const;

  int electrodes_on(int nu) const;  // n_nu
  int last_even_circle() const;     // N0 in [-1, N]
  int total_electrodes() const;     // Sum n_nu
  int s_total() const;              // Sum ceil(n_nu / 2)
};

// Boundary coefficients a(theta) u + b(theta) v = 0 of the full problem
// (u = J_x, v = -J_y): electrode arcs impose vanishing tangential electric
// field, dielectric arcs vanishing normal current. The p-transform of this
// field factors as p1 * p2 with p1 = -rho^2/(t-delta)^2 and p2 piecewise
// constant (1 on dielectrics, -(alpha-i beta)/(alpha+i beta) on electrodes).
CoefficientField build_coefficients(const HallPlateSpec& spec);

// The piecewise-constant factor only: coefficients whose p-transform is p2.
CoefficientField jump_coefficients(const HallPlateSpec& spec);

// Closed-form winding data of the piecewise-constant factor: kappa_nu =
// floor(n_nu/2) + 1 and the endpoint exponents alpha_nu_j from the
// delta* = atan(alpha/|beta|) / (2 pi) tables, separate for beta > 0 and
// beta < 0. No numeric unwrapping is involved.
BranchData hall_parameters(const HallPlateSpec& spec);

// Winding data of the full coefficient field, obtained by numeric
// unwrapping. Every exponent equals the hall_parameters table value, plus
// 1/2 at the first marked point (the simple zero of the first factor),
// modulo a whole turn; the per-circle winding is kappa_nu = s_nu + 1 for
// every circle, so circles with an odd electrode count get a first exponent
// in (-1, -1/2] and carry an endpoint condition. Throws if the unwrapped
// exponents are inconsistent with the tables.
BranchData combined_branch(const HallPlateSpec& spec, const CoefficientField& field);

// First canonical factor: chi1 = exp((Gamma1(z) + conj(Gamma1(T0 z))) / 2)
// with Gamma1 the clockwise boundary integral of ln(rho_nu / (tau - delta_nu))
// (branch cut through t_nu1) against the quasiautomorphic kernel. Simple
// zeros at every t_nu1; symmetric chi1(z) = conj(chi1(T0 z)) by construction.
struct HallChi1 {
  const KernelContext* ctx = nullptr;
  DomainSpec domain;
  BoundaryGrid grid;
  std::vector<Cx> density;     // ln(rho/(tau-delta)) at the grid nodes
  std::vector<double> anchor;  // angle of t_nu1 per circle
  std::vector<Cx> H1;          // measured factors per generator (H1[0] = 1)

  Cx gamma1(Cx z) const;  // z off L
  Cx value(Cx z) const;   // either side of L
  Cx boundary_plus(int circle, double theta) const;  // limit from D
};

HallChi1 build_chi1(const KernelContext& ctx, const HallPlateSpec& spec,
                    const QuadratureRule& rule = {});

// Series form of the chi1 factors: the group-orbit sum of the per-circle log
// potentials evaluated at sigma_nu(infinity). Principal logs determine the
// half-density factor up to sign; independent oracle for HallChi1::H1.
std::vector<Cx> chi1_factor_series(const KernelContext& ctx, const HallPlateSpec& spec);

// Second canonical factor as the quotient of the combined canonical
// function by chi1; its boundary ratio against conj is exactly p2 / H2.
struct HallChi2 {
  std::shared_ptr<const CanonicalFunction> combined;
  std::shared_ptr<const HallChi1> chi1;
  std::vector<Cx> H2;  // combined factor / chi1 factor per generator

  Cx value(Cx z) const;
  Cx boundary_plus(int circle, double theta) const;
};

struct FieldSample {
  double Jx = 0.0, Jy = 0.0;
  double Ex = 0.0, Ey = 0.0;
};

struct HallDiagnostics {
  double condition_estimate = 0.0;
  double residual_norm = 0.0;     // ||Ax - b|| after the solve
  double ratio_defect = 0.0;      // max | p conj(chi+)/chi+ - H | over probes
  // Dipole coefficient, the limit of z^2 * Phi(z): with zero net current and
  // a single-valued potential the 1/z term of Phi cancels exactly.
  Cx far_field_coefficient{0.0, 0.0};
  // relative change of z^2*Phi between the far circles at 10 and 20 diameters
  double far_field_variation = 0.0;
};

struct HallSolution {
  HallPlateSpec spec;
  CoefficientField field;         // full coefficients
  BranchData branch;              // combined winding data
  BranchData chi2_tables;         // hall_parameters output
  std::shared_ptr<GroupEnumeration> group;
  std::shared_ptr<KernelContext> kctx;  // quasiautomorphic kernel
  std::shared_ptr<KernelContext> mctx;  // quasimultiplicative kernel, combined factors
  ZeroPoleSchedule schedule;
  CanonicalFunction chi;          // combined canonical function (quadrature mode)
  std::shared_ptr<HallChi1> chi1;
  HallChi2 chi2;
  QuadratureRule rule;

  double C0 = 0.0;
  std::vector<Cx> C;  // one per schedule point, flattened circle-major
  HallDiagnostics diagnostics;

  Cx omega(Cx z) const;       // Sum C_m M(z, z_m)
  Cx evaluate(Cx z) const;    // Phi(z) = J_x - i J_y, z in D
  Cx boundary_value(int circle, double theta) const;  // Phi^+ on L
  FieldSample field_at(Cx z) const;
  // h0 * integral of the outward (into the electrode) normal current.
  double computed_current(int nu, int j) const;
  // Representation basis free of C0 (valid once the infinity rows hold).
  Cx s_plus(std::size_t m, Cx z) const;
  Cx s_minus(std::size_t m, Cx z) const;
};

// The square real system for [C0, Re C_m, Im C_m]: N invariance rows,
// 2 rows pinning the simple zero at infinity, one endpoint row per
// odd-electrode circle, one zero-circulation row per hole (the potential
// must be single-valued), and one current row per electrode.
struct HallAssembly {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<std::string> row_labels;
};

HallAssembly assemble_hall_system(const HallSolution& partial);

HallSolution solve_hall(const HallPlateSpec& spec, const QuadratureRule& rule = {},
                        int group_level = 4);

}  // namespace mch
