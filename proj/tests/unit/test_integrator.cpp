#include <cmath>

#include "contactnh/integrator.hpp"
#include "test_support.hpp"

using namespace contactnh;
using testing_support::P;
using testing_support::point;

namespace {

// n = 1, H = p^2/2 + z from (0, 0, 1): p stays 0 and z' = -z.
ConstrainedSystem exponential_decay() { return {1, P("p1^2/2 + z", 1), {}, {}}; }

double decay_error(double h) {
  const auto traj = integrate(exponential_decay(), point(1, {0, 0, 1}), {1.0, h, false});
  return std::abs(traj.states.back()[2] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("single RK4 steps") {
  const OdeField zero = [](const Vec& x) { return Vec::Zero(x.size()); };
  const Vec x = (Vec(3) << 1, 2, 3).finished();
  CHECK((rk4_step(zero, x, 0.1) - x).norm() == 0.0);

  const auto traj = integrate(exponential_decay(), point(1, {0, 0, 1}), {0.1, 0.1, false});
  REQUIRE(traj.size() == 2);
  // RK4 gives 1 - h + h^2/2 - h^3/6 + h^4/24 = 0.9048375, within 1e-7 of exp(-0.1) = 0.9048374...
  CHECK(std::abs(traj.states[1][2] - std::exp(-0.1)) <= 1e-7);
  CHECK(traj.states[1][2] == doctest::Approx(0.9048375).epsilon(1e-15));

  // Linear field x' = A x: one step reproduces exp(hA) through fourth order.
  Mat A(2, 2);
  A << 0, 1, -2, -0.3;
  const OdeField linear = [&](const Vec& y) -> Vec { return A * y; };
  const Vec y0 = (Vec(2) << 1, -0.5).finished();
  for (double h : {0.1, 0.05}) {
    const Mat hA = h * A;
    const Mat taylor4 = Mat::Identity(2, 2) + hA + hA * hA / 2 + hA * hA * hA / 6 + hA * hA * hA * hA / 24;
    CHECK((rk4_step(linear, y0, h) - taylor4 * y0).norm() <= 1e-15);
  }
}

TEST_CASE("global error is fourth order") {
  double previous = decay_error(0.1);
  for (int k = 1; k <= 6; ++k) {
    const double h = 0.1 / std::pow(2.0, k);
    const double err = decay_error(h);
    CAPTURE(h);
    CHECK(previous / err >= 14.0);
    previous = err;
  }
}

TEST_CASE("constrained drift with and without projection") {
  const auto sys = testing_support::damped_particle();
  const PhasePoint x0 = testing_support::sample_point();
  const auto free = integrate(sys, x0, {5.0, 1e-3, false});
  const auto projected = integrate(sys, x0, {5.0, 1e-3, true});
  REQUIRE_FALSE(free.error);
  REQUIRE_FALSE(projected.error);
  CHECK(free.size() == 5001);
  CHECK(free.max_drift() <= 1e-6);
  CHECK(projected.max_drift() <= 1e-10);
  for (std::size_t i = 0; i < free.size(); ++i) {
    CHECK(projected.times[i] == free.times[i]);
    if (projected.drift[i] > free.drift[i] + 1e-15) FAIL_CHECK("projection increased drift at sample " << i);
  }
  for (std::size_t i = 1; i < free.size(); ++i) CHECK(free.times[i] > free.times[i - 1]);
  // The multiplier at the start is the hand-solved 0.5.
  CHECK(free.multiplier_norm[0] == doctest::Approx(0.5));
}

TEST_CASE("halving the step leaves the trajectory unchanged to RK4 accuracy") {
  const auto sys = testing_support::damped_particle();
  const auto coarse = integrate(sys, testing_support::sample_point(), {2.0, 2e-3, false});
  const auto fine = integrate(sys, testing_support::sample_point(), {2.0, 1e-3, false});
  CHECK((coarse.states.back() - fine.states.back()).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("energy law along the constrained flow") {
  const auto sys = testing_support::damped_particle();
  const auto traj = integrate(sys, testing_support::sample_point(), {2.0, 1e-3, false});
  CHECK(energy_law_residual(sys, traj) <= 1e-8);
}

TEST_CASE("conservative limit keeps H") {
  const ConstrainedSystem sys(1, P("p1^2/2 + q1^2/2", 1), {}, {});
  const auto traj = integrate(sys, point(1, {1, 0, 0}), {5.0, 1e-2, false});
  for (double e : traj.energy) CHECK(std::abs(e - 0.5) <= 1e-9);
}

TEST_CASE("t_end = 0 gives one sample") {
  const auto traj = integrate(testing_support::damped_particle(), testing_support::sample_point(), {0.0, 1e-3, false});
  CHECK(traj.size() == 1);
  CHECK(traj.times[0] == 0.0);
  CHECK_THROWS_AS(integrate(exponential_decay(), point(1, {0, 0, 1}), {1.0, 0.0, false}), ConfigError);
  CHECK_THROWS_AS(integrate(exponential_decay(), point(1, {0, 0, 1}), {-1.0, 0.1, false}), ConfigError);
}

TEST_CASE("off-M start is rejected") {
  CHECK_THROWS_AS(integrate(testing_support::damped_particle(), point(2, {1, 0, 1, 2, 0}), {1.0, 1e-3, false}),
                  OffConstraint);
}

TEST_CASE("singular multiplier matrix halts with a partial trajectory") {
  // phi = p1, Psi = q1 dq1: X_a = -q1 d/dp1 and C = [-q1], singular when q1 reaches 0.
  const ConstrainedSystem sys(1, P("p1^2/2 + p1 + z", 1), {P("p1", 1)},
                              {testing_support::force(1, {"q1"}, {"0"}, "0")});
  const auto traj = integrate(sys, point(1, {-0.5, 0, 0}), {2.0, 0.125, false});
  REQUIRE(traj.error.has_value());
  CHECK(traj.error->find("rank") != std::string::npos);
  CHECK(traj.size() >= 1);
  CHECK(traj.size() < 17);
  for (const Vec& s : traj.states) CHECK(s.allFinite());
}

TEST_CASE("Lagrangian flow matches the Hamiltonian flow under Legendre") {
  for (const auto& mech : {testing_support::damped_particle_mechanical(), testing_support::anisotropic_mechanical()}) {
    const auto ham = induced_hamiltonian_system(mech);
    const LagrangianPoint x0{(Vec(2) << 1, 0).finished(), Vec::Ones(2), 0.0};
    const auto lag = integrate_lagrangian(mech, x0, {5.0, 1e-3, false});
    const auto hamtraj = integrate(ham, legendre(mech, x0), {5.0, 1e-3, false});
    REQUIRE(lag.size() == hamtraj.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < lag.size(); ++i) {
      const PhasePoint image = legendre(mech, LagrangianPoint::from_stacked(2, lag.states[i]));
      worst = std::max(worst, (image.data() - hamtraj.states[i]).lpNorm<Eigen::Infinity>());
      CHECK(std::abs(lag.energy[i] - hamtraj.energy[i]) <= 1e-5);
    }
    CHECK(worst <= 1e-5);
    CHECK(lag.max_drift() <= 1e-6);
    const auto lag_projected = integrate_lagrangian(mech, x0, {5.0, 1e-3, true});
    CHECK(lag_projected.max_drift() <= 1e-12);
  }
}

TEST_CASE("Lagrangian equilibrium and precondition") {
  const auto flat = testing_support::mechanical(2, {{"1", "0"}, {"0", "1"}}, "-z", {});
  const LagrangianPoint rest{(Vec(2) << 0.3, -0.2).finished(), Vec::Zero(2), 1.0};
  const auto traj = integrate_lagrangian(flat, rest, {1.0, 1e-2, false});
  for (const Vec& s : traj.states) CHECK((s.head(2) - rest.q).norm() == 0.0);
  const auto slope = testing_support::mechanical(2, {{"1", "0"}, {"0", "1"}}, "-z + q1", {});
  CHECK(integrate_lagrangian(slope, rest, {1.0, 1e-2, false}).states.back()[0] != rest.q[0]);

  const LagrangianPoint off{(Vec(2) << 1, 0).finished(), (Vec(2) << 1, 0).finished(), 0.0};
  CHECK_THROWS_AS(integrate_lagrangian(testing_support::damped_particle_mechanical(), off, {1.0, 1e-3, false}),
                  OffConstraint);
}
