#include "mch/rh_solver.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mch {

namespace {
Cx principal_half(Cx H) { return std::sqrt(H); }

double wrapped_distance(double a, double b) {
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

// χ⁺ at an arbitrary boundary angle, including the guard bands around the
// marked points where the one-sided quadrature limit is unreliable. There
// |χ⁺| scales like |t - t_νj|^{2 α_νj} with a Hölder-continuous remainder,
// so we evaluate at the guard edge and carry the modulus across with the
// local power law (the phase factor (t-t)^α · conj((t-t)^α) is real on L).
Cx chi_plus_robust(const CanonicalFunction& chi, const CoefficientField& field,
                   int circle, double theta) {
  if (chi.mode == CanonicalMode::product || !chi.gamma_)
    return chi.boundary_plus(circle, theta);
  const GammaFunction& gamma = *chi.gamma_;
  const double guard = 1.2 * gamma.grid.guard_angle;
  const CirclePartition& part = field.circles.at(static_cast<std::size_t>(circle));
  int jm = -1;
  double best = guard;
  for (int j = 0; j < part.m(); ++j) {
    const double d = wrapped_distance(theta, part.marked_angles[static_cast<std::size_t>(j)]);
    if (d < best) {
      best = d;
      jm = j;
    }
  }
  if (jm < 0) return chi.boundary_plus(circle, theta);
  const double theta_m = part.marked_angles[static_cast<std::size_t>(jm)];
  // step off the marked point on the same side, clear of the guard band
  double delta = std::remainder(theta - theta_m, 2.0 * 3.14159265358979323846);
  if (delta == 0.0) delta = 1e-14;
  const double sign = (delta >= 0.0) ? 1.0 : -1.0;
  const double theta_g = theta_m + sign * 1.5 * guard;
  const Circle& c = gamma.domain.circles.at(static_cast<std::size_t>(circle));
  const Cx tm = c.point(theta_m);
  const double r = std::abs(c.point(theta) - tm) / std::abs(c.point(theta_g) - tm);
  const double alpha = gamma.branch.circles.at(static_cast<std::size_t>(circle))
                           .alpha.at(static_cast<std::size_t>(jm));
  return chi.boundary_plus(circle, theta_g) * std::pow(r, 2.0 * alpha);
}
}  // namespace

// ---------------------------------------------------------------------------
// Omega0

Cx Omega0::basis(std::size_t m, Cx z) const { return eval_M(*ctx, z, points.at(m)); }

Cx Omega0::operator()(Cx z) const {
  Cx sum{0.0, 0.0};
  for (std::size_t m = 0; m < points.size(); ++m) sum += coeff[m] * basis(m, z);
  return sum;
}

Omega0 build_omega0(const KernelContext& mctx, const ZeroPoleSchedule& schedule,
                    const std::vector<Cx>& constants) {
  Omega0 om;
  om.ctx = &mctx;
  for (std::size_t nu = 0; nu < schedule.circles.size(); ++nu) {
    const auto& entry = schedule.circles[nu];
    if (entry.sign <= 0) continue;
    for (Cx p : entry.points) {
      om.points.push_back(p);
      om.point_circle.push_back(static_cast<int>(nu));
    }
  }
  if (!constants.empty() && constants.size() != om.points.size())
    throw std::invalid_argument("build_omega0: constants/points size mismatch");
  om.coeff = constants.empty() ? std::vector<Cx>(om.points.size(), Cx{0.0, 0.0})
                               : constants;
  return om;
}

// ---------------------------------------------------------------------------
// Psi0

Cx Psi0::operator()(Cx z) const {
  if (zero) return {0.0, 0.0};
  return cauchy_integral(
      grid, [&](Cx zz, Cx tau) { return eval_M(*ctx, zz, tau); }, density, z);
}

Cx Psi0::boundary(int circle, double theta, bool domain_side) const {
  if (zero) return {0.0, 0.0};
  Cx p, q;
  field.p_q(circle, theta, p, q);
  const Cx g_t = -q / (2.0 * chi_plus_robust(chi, field, circle, theta));
  const Side side = domain_side ? Side::minus : Side::plus;
  return cauchy_boundary_limit(
      grid, [&](Cx zz, Cx tau) { return eval_M(*ctx, zz, tau); }, density, circle,
      theta, g_t, side);
}

Cx Psi0::at_point(Cx t) const {
  if (zero) return {0.0, 0.0};
  return cauchy_integral(
      grid, [&](Cx zz, Cx tau) { return eval_M(*ctx, zz, tau); }, density, t);
}

Psi0 build_psi0(const KernelContext& mctx, const DomainSpec& dom,
                const CoefficientField& field, const CanonicalFunction& chi,
                const QuadratureRule& rule, bool homogeneous) {
  Psi0 psi;
  psi.ctx = &mctx;
  psi.chi = chi;
  psi.field = field;
  psi.zero = homogeneous;
  psi.grid = build_boundary_grid(dom, field.ccw_arcs(), rule);
  psi.density.assign(psi.grid.size(), Cx{0.0, 0.0});
  psi.chi_plus.assign(psi.grid.size(), Cx{1.0, 0.0});
  if (homogeneous) return psi;
  for (std::size_t i = 0; i < psi.grid.size(); ++i) {
    const auto& node = psi.grid.nodes[i];
    const Cx cp = chi_plus_robust(chi, field, node.circle, node.theta);
    Cx p, q;
    field.p_q(node.circle, node.theta, p, q);
    psi.chi_plus[i] = cp;
    psi.density[i] = -q / (2.0 * cp);
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Constraints

ConstraintSystem assemble_constraints(const RHProblem& problem,
                                      const KernelContext& mctx, const Omega0& basis,
                                      const Psi0& psi0) {
  const DomainSpec& dom = problem.domain;
  const int N = dom.holes();
  const std::size_t M = basis.points.size();  // κ⁺
  const int unknowns = static_cast<int>(2 * M + 1);

  ConstraintSystem sys;
  sys.h_half.assign(dom.size(), Cx{1.0, 0.0});
  for (std::size_t nu = 1; nu < dom.size(); ++nu)
    sys.h_half[nu] = principal_half(problem.chi.characters.H[nu]);

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  std::vector<ConstraintRow> tags;

  // Complex affine row helper: expr = c0_coef·C₀ + Σ_m a_m·C_m + conj-part,
  // assembled from per-unknown complex coefficients.
  auto push_row = [&](const Cx& c0_coef, const std::vector<Cx>& lin,
                      const std::vector<Cx>& conj_lin, Cx affine, bool real_part,
                      ConstraintRow tag) {
    Eigen::VectorXd row(unknowns);
    auto pick = [&](Cx v) { return real_part ? v.real() : v.imag(); };
    row[0] = pick(c0_coef);
    for (std::size_t m = 0; m < M; ++m) {
      // C_m = C'_m + iC''_m enters as lin·C_m + conj_lin·conj(C_m)
      const Cx dre = lin[m] + conj_lin[m];
      const Cx dim = Cx{0.0, 1.0} * lin[m] - Cx{0.0, 1.0} * conj_lin[m];
      row[static_cast<int>(1 + 2 * m)] = pick(dre);
      row[static_cast<int>(2 + 2 * m)] = pick(dim);
    }
    rows.push_back(row);
    rhs.push_back(-pick(affine));
    tags.push_back(tag);
  };

  const std::vector<Cx> zerov(M, Cx{0.0, 0.0});

  // Invariance rows at σ_k(z₀), k = 1..N.
  for (int k = 1; k <= N; ++k) {
    const Cx w = generator_map(dom, k)(mctx.base_point);
    const Cx hinv = 1.0 / sys.h_half[static_cast<std::size_t>(k)];
    std::vector<Cx> lin(M);
    for (std::size_t m = 0; m < M; ++m) lin[m] = hinv * basis.basis(m, w);
    push_row(hinv, lin, zerov, hinv * psi0(w), /*real_part=*/false,
             {ConstraintRow::Kind::invariance, k, -1});
  }

  // Pole-removal rows at the negative-winding schedule points (complex = 2 rows).
  for (std::size_t nu = 0; nu < dom.size(); ++nu) {
    const auto& entry = problem.schedule.circles[nu];
    if (entry.sign >= 0) continue;
    for (std::size_t j = 0; j < entry.points.size(); ++j) {
      const Cx z = entry.points[j];
      const Cx zt = reflect(dom.circles[0], z);
      std::vector<Cx> lin(M), clin(M);
      for (std::size_t m = 0; m < M; ++m) {
        lin[m] = basis.basis(m, z);
        clin[m] = std::conj(basis.basis(m, zt));
      }
      const Cx affine = psi0(z) + std::conj(psi0(zt));
      push_row(Cx{1.0, 0.0}, lin, clin, affine, true,
               {ConstraintRow::Kind::pole_re, static_cast<int>(nu), static_cast<int>(j)});
      push_row(Cx{1.0, 0.0}, lin, clin, affine, false,
               {ConstraintRow::Kind::pole_im, static_cast<int>(nu), static_cast<int>(j)});
    }
  }

  // Endpoint rows at t_ν1 where l_ν = 1.
  for (std::size_t nu = 0; nu < dom.size(); ++nu) {
    if (problem.branch.circles[nu].l == 0) continue;
    const double theta1 = problem.field.circles[nu].marked_angles.at(0);
    const Cx t = dom.circles[nu].point(theta1);
    const Cx w = (nu == 0) ? infinity_point()
                           : generator_map(dom, static_cast<int>(nu))(mctx.base_point);
    const Cx hinv = 1.0 / sys.h_half[nu];
    std::vector<Cx> lin(M);
    for (std::size_t m = 0; m < M; ++m)
      lin[m] = hinv * (2.0 * basis.basis(m, t) - basis.basis(m, w));
    const Cx affine = hinv * (2.0 * psi0.at_point(t) - psi0(w));
    push_row(hinv, lin, zerov, affine, true,
             {ConstraintRow::Kind::endpoint, static_cast<int>(nu), -1});
  }

  // Optional normalization Φ(∞) = 0: C₀ + conj(Ω₀(δ₀)) + conj(Ψ₀(δ₀)) = 0.
  if (problem.zero_at_infinity) {
    const Cx d0 = dom.circles[0].center;
    std::vector<Cx> clin(M);
    for (std::size_t m = 0; m < M; ++m) clin[m] = std::conj(basis.basis(m, d0));
    const Cx affine = std::conj(psi0(d0));
    push_row(Cx{1.0, 0.0}, zerov, clin, affine, true,
             {ConstraintRow::Kind::infinity_re, -1, -1});
    push_row(Cx{1.0, 0.0}, zerov, clin, affine, false,
             {ConstraintRow::Kind::infinity_im, -1, -1});
  }

  sys.A.resize(static_cast<int>(rows.size()), unknowns);
  sys.b.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sys.A.row(static_cast<int>(i)) = rows[i];
    sys.b[static_cast<int>(i)] = rhs[i];
  }
  sys.rows = std::move(tags);
  return sys;
}

// ---------------------------------------------------------------------------
// Solve

RHSolution solve_problem(const RHProblem& problem) {
  if (!problem.ctx || !problem.ctx->prepared())
    throw std::logic_error("solve_problem: kernel context not prepared");

  RHSolution sol;
  sol.chi = problem.chi;
  sol.domain = problem.domain;
  sol.branch = problem.branch;
  sol.mctx = std::make_shared<KernelContext>(*problem.ctx);
  sol.mctx->characters = problem.chi.characters;
  sol.mctx->prepare();

  sol.omega0 = build_omega0(*sol.mctx, problem.schedule, {});
  sol.psi0 = build_psi0(*sol.mctx, problem.domain, problem.field, problem.chi,
                        problem.rule, problem.homogeneous);
  sol.system = assemble_constraints(problem, *sol.mctx, sol.omega0, sol.psi0);

  ConstraintSystem& sys = sol.system;
  const int unknowns = static_cast<int>(sys.A.cols());
  const int nrows = static_cast<int>(sys.A.rows());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(unknowns);
  int rank = 0;
  sys.conditioning_warning = false;
  if (nrows > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    sys.singular_values.assign(sv.data(), sv.data() + sv.size());
    for (int i = 0; i < sv.size(); ++i) {
      const double r = smax > 0.0 ? sv[i] / smax : 0.0;
      if (r > sys.sv_threshold) ++rank;
      if (r > 1e-12 && r < 1e-8) sys.conditioning_warning = true;
    }
    // Minimum-norm least squares on the numerically significant subspace.
    Eigen::VectorXd ub = svd.matrixU().transpose() * sys.b;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(unknowns);
    for (int i = 0; i < rank; ++i) y[i] = ub[i] / sv[i];
    x = svd.matrixV() * y;
    for (int i = rank; i < unknowns; ++i)
      sol.null_basis.push_back(svd.matrixV().col(i));
  } else {
    for (int i = 0; i < unknowns; ++i)
      sol.null_basis.push_back(Eigen::VectorXd::Unit(unknowns, i));
  }
  sys.rank = rank;

  sol.C0 = x[0];
  sol.C.resize(sol.omega0.points.size());
  for (std::size_t m = 0; m < sol.C.size(); ++m)
    sol.C[m] = Cx{x[static_cast<int>(1 + 2 * m)], x[static_cast<int>(2 + 2 * m)]};
  sol.omega0.coeff = sol.C;

  SolvabilityReport& rep = sol.report;
  rep.index = problem.branch.total_index();
  rep.unknowns = unknowns;
  rep.row_count = nrows;
  rep.rank = rank;
  rep.family_dimension = std::max(0, unknowns - rank);
  rep.conditioning_warning = sys.conditioning_warning;
  if (nrows > 0) {
    const Eigen::VectorXd resid = sys.A * x - sys.b;
    rep.residual_norm = resid.norm();
    rep.rhs_norm = sys.b.norm();
    rep.feasible = rep.residual_norm <= 1e-6 * std::max(rep.rhs_norm, 1e-30);
    if (!rep.feasible) {
      const double cut = 1e-6 * std::max(rep.rhs_norm, 1e-30);
      for (int i = 0; i < resid.size(); ++i)
        if (std::abs(resid[i]) > cut) rep.violated_rows.push_back(i);
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Evaluation

Cx RHSolution::evaluate(Cx z) const {
  if (!domain.in_domain(z, -1e-12 * domain.scale()))
    throw std::invalid_argument("rh_solver: evaluation point outside D");
  const Cx zt = reflect(domain.circles[0], z);
  const Cx bracket = C0 + omega0(z) + std::conj(omega0(zt)) + psi0(z) +
                     std::conj(psi0(zt));
  return chi.value(z) * bracket;
}

Cx RHSolution::boundary_plus(int circle, double theta) const {
  const Cx chp = chi.boundary_plus(circle, theta);
  const Cx t = domain.circles[static_cast<std::size_t>(circle)].point(theta);
  const Cx om_t = omega0(t);
  const Cx psi_p = psi0.boundary(circle, theta, true);
  const Cx psi_m = psi0.boundary(circle, theta, false);
  if (circle == 0)
    return chp * (C0 + om_t + std::conj(om_t) + psi_p + std::conj(psi_m));
  const Cx H = chi.characters.H[static_cast<std::size_t>(circle)];
  const Cx w = generator_map(domain, circle)(mctx->base_point);
  const Cx om_w = omega0(w);
  const Cx psi_w = psi0(w);
  const Cx s = std::conj(1.0 / H);
  return chp * (C0 + om_t + s * (std::conj(om_t) - std::conj(om_w)) + psi_p +
                s * (std::conj(psi_m) - std::conj(psi_w)));
}

Cx RHSolution::boundary_minus(int circle, double theta) const {
  // The disk-side branch of Φ is the reflected conjugate of the domain-side
  // one, so its boundary limit is just the conjugate of Φ⁺. (Φ⁺ = pΦ⁻ + q is
  // then the original condition a·u + b·v = c in complex form.)
  return std::conj(boundary_plus(circle, theta));
}

void RHSolution::shift(const Eigen::VectorXd& direction, double amount) {
  if (direction.size() != 1 + 2 * static_cast<int>(C.size()))
    throw std::invalid_argument("rh_solver: direction dimension mismatch");
  C0 += amount * direction[0];
  for (std::size_t m = 0; m < C.size(); ++m)
    C[m] += amount * Cx{direction[static_cast<int>(1 + 2 * m)],
                        direction[static_cast<int>(2 + 2 * m)]};
  omega0.coeff = C;
}

}  // namespace mch
