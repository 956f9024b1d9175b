#include <cmath>

#include "contactnh/lagrangian.hpp"
#include "test_support.hpp"

using namespace contactnh;
using testing_support::mechanical;

namespace {

// Non-constant metric, z-dependent potential, one q-dependent constraint form.
MechanicalSystem curved() {
  return mechanical(2, {{"2 + q2^2", "0.3*q1"}, {"0.3*q1", "1.5"}}, "-z*(1 + q1^2/4) + cos(q2)", {{"1", "q1"}});
}

LagrangianPoint in_D(const MechanicalSystem& sys, UniformSource& src) {
  LagrangianPoint x{src.vector(sys.n(), -1, 1), src.vector(sys.n(), -1, 1), src.uniform(-1, 1)};
  if (sys.m() > 0) {
    const Mat Phi = sys.forms(x.q);
    x.v -= Phi.transpose() * (Phi * Phi.transpose()).ldlt().solve(Phi * x.v);
  }
  return x;
}

// Generic constrained Herglotz equations from finite differences of L alone:
// L_vv vdot + L_vq v + L_vz L = L_q + L_v L_z + Phi^T lambda,  d/dt Phi(v) = 0.
Vec herglotz_oracle(const MechanicalSystem& sys, const LagrangianPoint& x) {
  const int n = sys.n(), m = sys.m(), d = 2 * n + 1;
  const double h = 1e-4;
  auto L = [&](const Vec& s) { return sys.lagrangian(LagrangianPoint::from_stacked(n, s)); };
  const Vec s0 = x.stacked();
  Vec grad(d);
  Mat hess(d, d);
  for (int i = 0; i < d; ++i) {
    Vec a = s0, b = s0;
    a[i] += h;
    b[i] -= h;
    grad[i] = (L(a) - L(b)) / (2 * h);
    for (int j = 0; j < d; ++j) {
      Vec pp = s0, pm = s0, mp = s0, mm = s0;
      pp[i] += h, pp[j] += h;
      pm[i] += h, pm[j] -= h;
      mp[i] -= h, mp[j] += h;
      mm[i] -= h, mm[j] -= h;
      hess(i, j) = (L(pp) - L(pm) - L(mp) + L(mm)) / (4 * h * h);
    }
  }
  const Vec Lq = grad.head(n), Lv = grad.segment(n, n);
  const double Lz = grad[2 * n];
  const Mat Lvv = hess.block(n, n, n, n), Lvq = hess.block(n, 0, n, n);
  const Vec Lvz = hess.block(n, 2 * n, n, 1);
  const Mat Phi = sys.forms(x.q);
  Mat dPhi_v = Mat::Zero(m, n);  // (d_k Phi^a_i v^k)
  for (int k = 0; k < n; ++k) dPhi_v += x.v[k] * sys.form_derivative(k, x.q);

  Mat A = Mat::Zero(n + m, n + m);
  Vec b(n + m);
  A.topLeftCorner(n, n) = Lvv;
  A.topRightCorner(n, m) = -Phi.transpose();
  A.bottomLeftCorner(m, n) = Phi;
  b.head(n) = Lq + Lv * Lz - Lvq * x.v - Lvz * L(s0);
  b.tail(m) = -dPhi_v * x.v;
  const Vec sol = A.fullPivLu().solve(b);
  Vec out(d + m);
  out << x.v, sol.head(n), L(s0), sol.tail(m);
  return out;
}

}  // namespace

TEST_CASE("velocity Hessian and its inverse") {
  const auto I = testing_support::damped_particle_mechanical();
  const LagrangianPoint x{Vec::Zero(2), Vec::Ones(2), 0.0};
  CHECK((hessian_W(I, x) - Mat::Identity(2, 2)).norm() == 0.0);
  const auto aniso = testing_support::anisotropic_mechanical();
  Mat expected(2, 2);
  expected << 0.5, 0, 0, 1;
  CHECK((hessian_W_inverse(aniso, x) - expected).norm() <= 1e-15);

  UniformSource src(91);
  const auto sys = curved();
  for (int k = 0; k < 20; ++k) {
    const auto y = in_D(sys, src);
    CHECK((hessian_W(sys, y) * hessian_W_inverse(sys, y) - Mat::Identity(2, 2)).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  const auto indefinite = mechanical(1, {{"q1"}}, "0", {});
  CHECK_THROWS_AS(hessian_W_inverse(indefinite, LagrangianPoint{-Vec::Ones(1), Vec::Ones(1), 0}), NotPositiveDefinite);
  CHECK_THROWS_AS(mechanical(2, {{"1", "q1"}, {"0", "1"}}, "0", {}).metric(Vec::Ones(2)), ConfigError);
}

TEST_CASE("energy and Lagrangian contact form") {
  const auto sys = testing_support::damped_particle_mechanical();
  const LagrangianPoint x{(Vec(2) << 1, 0).finished(), Vec::Ones(2), 0.0};
  const auto e = energy_and_form(sys, x);
  CHECK(e.energy == 1.0);
  testing_support::check_close(e.eta_L.data(), (Vec(5) << -1, -1, 0, 0, 1).finished(), 0.0);
  const LagrangianPoint rest{(Vec(2) << 0.3, 0).finished(), Vec::Zero(2), 2.0};
  CHECK(energy_and_form(sys, rest).energy == doctest::Approx(2.0));
}

TEST_CASE("Legendre transform") {
  const auto aniso = testing_support::anisotropic_mechanical();
  const LagrangianPoint x{Vec::Zero(2), Vec::Ones(2), 0.5};
  const PhasePoint p = legendre(aniso, x);
  testing_support::check_close(p.data(), (Vec(5) << 0, 0, 2, 1, 0.5).finished(), 0.0);

  UniformSource src(92);
  for (const auto& sys : {curved(), aniso}) {
    const auto ham = induced_hamiltonian_system(sys);
    for (int k = 0; k < 50; ++k) {
      const auto y = in_D(sys, src);
      const auto back = legendre_inverse(sys, legendre(sys, y));
      CHECK((back.stacked() - y.stacked()).lpNorm<Eigen::Infinity>() <= 1e-12);
      const PhasePoint Y = legendre(sys, y);
      const auto e = energy_and_form(sys, y);
      CHECK(std::abs(ham.H()(Y) - e.energy) <= 1e-12 * ham.scale(Y));
      // FL maps D x R onto M.
      CHECK(ham.violation(Y) <= 1e-12);
      // Pullback of eta along FL: eta(T FL w) = eta_L(w).
      const Vec w = src.vector(5, -1, 1);
      const VectorValue Tw = legendre_tangent(sys, y, w);
      CHECK(std::abs(contact::eta_at(Y, Tw) - e.eta_L.data().dot(w)) <= 1e-10);
    }
  }
}

TEST_CASE("induced Hamiltonian systems") {
  const auto sys = induced_hamiltonian_system(testing_support::damped_particle_mechanical());
  const auto expected = testing_support::damped_particle();
  UniformSource src(93);
  for (int k = 0; k < 20; ++k) {
    const PhasePoint x(2, src.vector(5, -1, 1));
    CHECK(std::abs(sys.H()(x) - expected.H()(x)) <= 1e-15);
    CHECK(std::abs(sys.constraints()[0](x) - expected.constraints()[0](x)) <= 1e-15);
    CHECK((sys.force_matrix(x) - expected.force_matrix(x)).norm() == 0.0);
  }
  // diag(2, 1) with Phi = dq2 gives phi = p2.
  const auto dq2 = induced_hamiltonian_system(mechanical(2, {{"2", "0"}, {"0", "1"}}, "-z", {{"0", "1"}}));
  const PhasePoint x = testing_support::point(2, {0.1, 0.2, 0.3, 0.4, 0.5});
  CHECK(dq2.constraints()[0](x) == doctest::Approx(0.4));
  CHECK(dq2.H()(x) == doctest::Approx(0.3 * 0.3 / 4 + 0.4 * 0.4 / 2 + 0.5));

  const auto curved_sys = curved();
  const auto ham = induced_hamiltonian_system(curved_sys);
  UniformSource pts(94);
  for (const PhasePoint& y : sample_on_M(ham, 30, pts, 1.0)) {
    CHECK(structural_checks(ham, y).all());
    CHECK(uniqueness_check(ham, y).unique);
  }
}

TEST_CASE("constrained Herglotz at the sample point") {
  const auto sys = testing_support::damped_particle_mechanical();
  const LagrangianPoint x{(Vec(2) << 1, 0).finished(), Vec::Ones(2), 0.0};
  const auto s = herglotz_solve(sys, x);
  CHECK(std::abs(s.lambdas(0) - 0.5) <= 1e-12);
  testing_support::check_close(s.vdot, (Vec(2) << -1.5, -0.5).finished(), 1e-12);
  CHECK(std::abs(s.zdot - 1.0) <= 1e-12);
  testing_support::check_close(s.qdot, x.v, 0.0);
  const auto ham = induced_hamiltonian_system(sys);
  CHECK(correspondence_residual(sys, ham, x) <= 1e-10);
  const LagrangianPoint bad{(Vec(2) << 1, 0).finished(), (Vec(2) << 1, 0).finished(), 0.0};
  CHECK_THROWS_AS(herglotz_solve(sys, bad), OffConstraint);
  CHECK_NOTHROW(herglotz_solve(sys, bad, Membership::Extend));
}

TEST_CASE("Herglotz field agrees with the generic oracle and keeps v in D") {
  UniformSource src(95);
  for (const auto& sys : {curved(), testing_support::anisotropic_mechanical(),
                          mechanical(2, {{"1 + q1^2", "0"}, {"0", "1"}}, "-z^2/2 + q1*q2", {})}) {
    for (int k = 0; k < 30; ++k) {
      const auto x = in_D(sys, src);
      const Vec field = lagrangian_constrained_vector(sys, x);
      const Vec oracle = herglotz_oracle(sys, x);
      CHECK((field - oracle.head(5)).lpNorm<Eigen::Infinity>() <= 1e-6);
      if (sys.m() > 0) CHECK((herglotz_solve(sys, x).lambdas - oracle.tail(sys.m())).lpNorm<Eigen::Infinity>() <= 1e-6);
      // SODE, exactly.
      CHECK((field.head(2) - x.v).lpNorm<Eigen::Infinity>() == 0.0);
      // d/dt Phi(v) = (d_k Phi v^k) v + Phi vdot = 0.
      if (sys.m() > 0) {
        Mat dPhi = Mat::Zero(sys.m(), 2);
        for (int j = 0; j < 2; ++j) dPhi += x.v[j] * sys.form_derivative(j, x.q);
        const Vec rate = dPhi * x.v + sys.forms(x.q) * field.segment(2, 2);
        CHECK(rate.lpNorm<Eigen::Infinity>() <= 1e-9);
      }
      const auto ham = induced_hamiltonian_system(sys);
      CHECK(correspondence_residual(sys, ham, x) <= 1e-8 * ham.scale(legendre(sys, x)));
    }
  }
}
