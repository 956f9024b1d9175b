// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "contactnh/brackets.hpp"
#include "contactnh/calculus.hpp"
#include "contactnh/commands.hpp"
#include "contactnh/config.hpp"
#include "contactnh/integrator.hpp"
#include "contactnh/sampling.hpp"

using namespace contactnh;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Tracks the worst residual against one tolerance.
struct Meter {
  const char* name;
  double tolerance;
  double worst = 0.0;
  void add(double r) { worst = std::isfinite(r) ? std::max(worst, r) : INFINITY; }
  bool ok() const { return worst <= tolerance; }
  std::string str() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.2e <= %.0e", name, worst, tolerance);
    return buf;
  }
};

Outcome combine(std::initializer_list<const Meter*> meters) {
  Outcome o;
  for (const Meter* m : meters) {
    o.pass = o.pass && m->ok();
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += m->str();
  }
  return o;
}

expr::Expr P(const std::string& text, int n = 2) { return expr::parse(text, n); }

ForceForm dq_force(int n, const std::vector<std::string>& dq) {
  ForceForm f;
  for (int i = 0; i < n; ++i) {
    f.dq.push_back(P(dq[static_cast<std::size_t>(i)], n));
    f.dp.emplace_back();
  }
  return f;
}

ConstrainedSystem damped_particle() {
  return {2, P("p1^2/2 + p2^2/2 + z"), {P("p2 - q1*p1")}, {dq_force(2, {"-q1", "1"})}};
}

MechanicalSystem mechanical(const std::vector<std::vector<std::string>>& g, const std::string& V,
                            const std::vector<std::vector<std::string>>& forms) {
  auto matrix = [](const std::vector<std::vector<std::string>>& rows) {
    MechanicalSystem::ExprMatrix out;
    for (const auto& row : rows) {
      std::vector<expr::Expr> r;
      for (const auto& s : row) r.push_back(P(s));
      out.push_back(r);
    }
    return out;
  };
  return {2, matrix(g), P(V), matrix(forms)};
}

MechanicalSystem particle_mechanical() { return mechanical({{"1", "0"}, {"0", "1"}}, "-z", {{"-q1", "1"}}); }
MechanicalSystem anisotropic_mechanical() { return mechanical({{"2", "0"}, {"0", "1"}}, "-z", {{"-q1", "1"}}); }

Outcome isomorphism_suite() {
  Meter iso{"flat/sharp round trip", 1e-12}, frame{"frame formulas", 1e-12};
  UniformSource src(101);
  for (int n : {1, 2, 4}) {
    const int d = 2 * n + 1;
    for (int k = 0; k < 1000; ++k) {
      const PhasePoint x(n, src.vector(d, -2, 2));
      const VectorValue v(n, src.vector(d, -1, 1));
      const OneFormValue a(n, src.vector(d, -1, 1));
      iso.add((contact::sharp_at(x, contact::flat_at(x, v)) - v).inf_norm());
      iso.add((contact::flat_at(x, contact::sharp_at(x, a)) - a).inf_norm());
      const OneFormValue eta = contact::eta(x);
      const auto dz = basis_element<OneFormValue>(n, 2 * n);
      const auto ddz = basis_element<VectorValue>(n, 2 * n);
      VectorValue sharp_dz = ddz;
      for (int i = 0; i < n; ++i) sharp_dz[n + i] = -x.p(i);
      frame.add((contact::sharp_at(x, dz) - sharp_dz).inf_norm());
      frame.add((contact::flat_at(x, contact::reeb(n)) - eta).inf_norm());
      for (int i = 0; i < n; ++i) {
        const auto dq = basis_element<OneFormValue>(n, i);
        const auto dp = basis_element<OneFormValue>(n, n + i);
        const auto ddq = basis_element<VectorValue>(n, i);
        const auto ddp = basis_element<VectorValue>(n, n + i);
        frame.add((contact::sharp_at(x, dq) + ddp).inf_norm());
        frame.add((contact::sharp_at(x, dp) - (ddq + x.p(i) * ddz)).inf_norm());
        frame.add((contact::flat_at(x, ddp) + dq).inf_norm());
        frame.add((contact::flat_at(x, ddq) - (dp - x.p(i) * eta)).inf_norm());
      }
    }
  }
  return combine({&iso, &frame});
}

Outcome unconstrained_dissipation() {
  Meter energy{"energy", 1e-8}, eta{"eta", 1e-8}, div{"divergence", 1e-8};
  struct Case {
    int n;
    const char* H;
  };
  const Case cases[] = {{1, "p1^2/2 + q1^2/2 + 0.3*z"},
                        {2, "p1^2/2 + p2^2/2 + z*(1 + q1^2) + sin(q2)"},
                        {3, "exp(z/4)*(p1^2 + p2^2 + p3^2)/2 + q1*q2*q3 - z^2/2"}};
  UniformSource src(102);
  for (const auto& c : cases) {
    const ScalarField H = ScalarField::parse(c.H, c.n);
    const auto XH = contact::hamiltonian_vf(H);
    for (int k = 0; k < 500; ++k) {
      const PhasePoint x(c.n, src.vector(2 * c.n + 1, -1.5, 1.5));
      const double h = H(x), RH = H.gradient(x).z(), scale = tolerance_scale(h, x);
      energy.add(std::abs(lie_scalar(*XH, H, x) + RH * h) / scale);
      eta.add((lie_eta(*XH, x) + RH * contact::eta(x)).inf_norm() / scale);
      div.add(std::abs(divergence(*XH, x) + (c.n + 1) * RH) / scale);
    }
  }
  return combine({&energy, &eta, &div});
}

Outcome solution_contract() {
  Meter tangency{"tangency", 1e-9}, membership{"force membership", 1e-9};
  const ConstrainedSystem aniso = induced_hamiltonian_system(anisotropic_mechanical());
  UniformSource src(103);
  for (const auto& sys : {damped_particle(), aniso}) {
    for (const PhasePoint& x : sample_on_M(sys, 200, src, 1.5)) {
      const VectorValue X = constrained_vector(sys, x);
      tangency.add(tangency_residual(sys, x, X) / sys.scale(x));
      membership.add(force_membership_residual(sys, x, X) / sys.scale(x));
    }
  }
  return combine({&tangency, &membership});
}

Outcome hand_solve() {
  const auto sys = damped_particle();
  const PhasePoint x(2, (Vec(5) << 1, 0, 1, 1, 0).finished());
  const Vec expected = (Vec(5) << 1, 1, -1.5, -0.5, 1).finished();

  // Dense oracle: [flat; dphi] X - [Psi^T; 0] mu = [dH - (H + R(H)) eta; 0], engine multiplier = -mu.
  Mat A = Mat::Zero(6, 6);
  Vec b = Vec::Zero(6);
  A.topLeftCorner(5, 5) = contact::flat_matrix(x);
  A.topRightCorner(5, 1) = -sys.force_matrix(x).transpose();
  A.bottomLeftCorner(1, 5) = sys.constraint_jacobian(x);
  const OneFormValue dH = sys.H().gradient(x);
  b.head(5) = (dH - (sys.H()(x) + dH.z()) * contact::eta(x)).data();
  const Vec oracle = A.fullPivLu().solve(b);

  Meter c{"C + 2", 1e-12}, lambda{"multiplier - 0.5", 1e-12}, field{"X_{H,M}", 1e-12}, dense{"dense oracle", 1e-12};
  c.add(std::abs(c_matrix(sys, x)(0, 0) + 2.0));
  lambda.add(std::abs(solve_multipliers(sys, x, sys.hamiltonian_field().value(x)).lambdas(0) - 0.5));
  field.add((constrained_vector(sys, x).data() - expected).lpNorm<Eigen::Infinity>());
  dense.add(std::max((oracle.head(5) - expected).lpNorm<Eigen::Infinity>(), std::abs(-oracle(5) - 0.5)));
  return combine({&c, &lambda, &field, &dense});
}

double algebra_residual(const Mat& P) {
  const Mat Q = Mat::Identity(P.rows(), P.cols()) - P;
  return std::max({(P * P - P).lpNorm<Eigen::Infinity>(), (Q * Q - Q).lpNorm<Eigen::Infinity>(),
                   (P * Q).lpNorm<Eigen::Infinity>(), (Q * P).lpNorm<Eigen::Infinity>()});
}

Outcome projector_coincidence() {
  Meter coincide{"roman-P vs calligraphic-P on X_H", 1e-9}, algebra{"idempotence/complementarity", 1e-10};
  const auto sys = damped_particle();
  UniformSource src(105);
  for (const PhasePoint& x : sample_on_M(sys, 200, src, 1.5)) {
    const VectorValue XH = sys.hamiltonian_field().value(x);
    coincide.add((roman_p_projector(sys, x, XH) - projector_P(sys, x, XH)).inf_norm() / sys.scale(x));
    algebra.add(algebra_residual(projector_matrix(sys, x)));
    algebra.add(algebra_residual(roman_p_matrix(sys, x)));
  }
  return combine({&coincide, &algebra});
}

Outcome triple_coincidence() {
  Meter triple{"nh = p_nh = eden", 1e-8}, casimir{"Casimir", 1e-9}, evolution{"evolution", 1e-8};
  UniformSource src(106);
  std::vector<std::pair<ScalarField, ScalarField>> pairs;
  for (int i = 0; i < 10; ++i) pairs.emplace_back(random_polynomial(2, src), random_polynomial(2, src));
  for (const auto& mech : {particle_mechanical(), anisotropic_mechanical()}) {
    const auto sys = induced_hamiltonian_system(mech);
    const ScalarField& phi = sys.constraints()[0];
    for (const PhasePoint& x : sample_on_M(sys, 100, src, 1.5)) {
      const double scale = sys.scale(x);
      for (const auto& [f, g] : pairs) {
        const double nh = nh_bracket(sys, f, g, x);
        triple.add(std::abs(nh - p_nh_bracket(sys, f, g, x)) / scale);
        triple.add(std::abs(nh - eden_bracket(sys, f, g, x)) / scale);
      }
      for (BracketKind kind : {BracketKind::Nonholonomic, BracketKind::PNonholonomic, BracketKind::Eden}) {
        casimir.add(std::abs(bracket(sys, kind, phi, pairs[0].first, x)) / scale);
        evolution.add(std::abs(evolution_residual(sys, kind, pairs[1].first, x)) / scale);
        evolution.add(std::abs(evolution_residual(sys, kind, sys.H(), x)) / scale);
      }
    }
  }
  return combine({&triple, &casimir, &evolution});
}

Outcome legendre_correspondence() {
  Meter pullback{"pullback", 1e-8}, energy{"energy", 1e-8}, field{"pushforward", 1e-8}, flow{"flow sup-norm", 1e-5};
  UniformSource src(107);
  for (const auto& mech : {particle_mechanical(), anisotropic_mechanical()}) {
    const auto ham = induced_hamiltonian_system(mech);
    for (int k = 0; k < 200; ++k) {
      LagrangianPoint x{src.vector(2, -1.5, 1.5), src.vector(2, -1.5, 1.5), src.uniform(-1.5, 1.5)};
      const Mat Phi = mech.forms(x.q);
      x.v -= Phi.transpose() * (Phi * Phi.transpose()).ldlt().solve(Phi * x.v);
      const PhasePoint X = legendre(mech, x);
      const double scale = ham.scale(X);
      const auto e = energy_and_form(mech, x);
      const Vec w = src.vector(5, -1, 1);
      pullback.add(std::abs(contact::eta_at(X, legendre_tangent(mech, x, w)) - e.eta_L.data().dot(w)) / scale);
      energy.add(std::abs(ham.H()(X) - e.energy) / scale);
      field.add(correspondence_residual(mech, ham, x) / scale);
    }
    const LagrangianPoint x0{(Vec(2) << 1, 0).finished(), Vec::Ones(2), 0.0};
    const auto lag = integrate_lagrangian(mech, x0, {5.0, 1e-3, false});
    const auto hamtraj = integrate(ham, legendre(mech, x0), {5.0, 1e-3, false});
    if (lag.error || hamtraj.error || lag.size() != hamtraj.size()) {
      flow.add(INFINITY);
      continue;
    }
    for (std::size_t i = 0; i < lag.size(); ++i) {
      const PhasePoint image = legendre(mech, LagrangianPoint::from_stacked(2, lag.states[i]));
      flow.add((image.data() - hamtraj.states[i]).lpNorm<Eigen::Infinity>());
    }
  }
  return combine({&pullback, &energy, &field, &flow});
}

Outcome integrator_order() {
  const ConstrainedSystem decay(1, P("p1^2/2 + z", 1), {}, {});
  const PhasePoint start(1, (Vec(3) << 0, 0, 1).finished());
  auto error_at = [&](double h) {
    const auto t = integrate(decay, start, {1.0, h, false});
    return std::abs(t.states.back()[2] - std::exp(-1.0));
  };
  // Halvings from 1e-1 down to 7.8e-4, covering the decade 1e-1 .. 1e-3.
  double min_ratio = INFINITY, previous = error_at(0.1);
  for (int k = 1; k <= 7; ++k) {
    const double err = error_at(0.1 / std::pow(2.0, k));
    min_ratio = std::min(min_ratio, previous / err);
    previous = err;
  }
  Meter drift_free{"drift unprojected", 1e-6}, drift_proj{"drift projected", 1e-9};
  const auto sys = damped_particle();
  const PhasePoint x0(2, (Vec(5) << 1, 0, 1, 1, 0).finished());
  for (bool project : {false, true}) {
    const auto t = integrate(sys, x0, {10.0, 1e-3, project});
    (project ? drift_proj : drift_free).add(t.error ? INFINITY : t.max_drift());
  }
  Outcome o = combine({&drift_free, &drift_proj});
  char buf[96];
  std::snprintf(buf, sizeof buf, "min error ratio %.2f >= 14; ", min_ratio);
  o.detail = buf + o.detail;
  o.pass = o.pass && min_ratio >= 14.0;
  return o;
}

Outcome negative_controls() {
  Outcome o;
  auto expect = [&](bool ok, const std::string& what) {
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what + (ok ? " ok" : " MISSING");
  };
  const auto cfg = load_config(std::string(CONTACTNH_SOURCE_DIR) + "/configs/damped_particle.toml");
  const auto report = cli::verify_report(cfg, cfg.sample_count, cfg.seed);
  for (const char* name : {"negative.reeb_in_F_with_dz", "negative.singular_c", "negative.off_constraint"}) {
    expect(report.contains(name) && report[name].value("pass", false), std::string("verify ") + name);
  }
  auto with_dz = cfg;
  with_dz.forces.push_back({std::vector<std::string>(2, "0"), std::vector<std::string>(2, "0"), "1"});
  const auto flipped = cli::verify_report(with_dz, 3, cfg.seed);
  expect(flipped["structural.reeb_in_F"]["pass"] == false && !cli::report_passes(flipped), "dz flips reeb_in_F");

  const auto sys = damped_particle();
  const PhasePoint x(2, (Vec(5) << 1, 0, 1, 1, 0).finished());
  bool singular = false;
  try {
    constrained_vector(sys.with_extra_force(sys.forces()[0]), x);
  } catch (const SingularC&) {
    singular = true;
  }
  expect(singular, "duplicated force raises SingularC");
  bool off = false;
  try {
    integrate(sys, PhasePoint(2, (Vec(5) << 1, 0, 1, 1.1, 0).finished()), {1.0, 1e-3, false});
  } catch (const OffConstraint&) {
    off = true;
  }
  expect(off, "off-M start raises OffConstraint");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0 means no runtime limit
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "flat/sharp isomorphism and frame formulas", 5.0, isomorphism_suite},
      {2, "unconstrained dissipation identities", 10.0, unconstrained_dissipation},
      {3, "constrained solution contract", 10.0, solution_contract},
      {4, "hand-solved damped particle", 0.0, hand_solve},
      {5, "projector coincidence and algebra", 0.0, projector_coincidence},
      {6, "triple bracket coincidence", 0.0, triple_coincidence},
      {7, "Legendre correspondence", 0.0, legendre_correspondence},
      {8, "integrator order and drift", 60.0, integrator_order},
      {9, "negative controls", 0.0, negative_controls},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("unexpected error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    char timing[64];
    if (c.budget_s > 0.0)
      std::snprintf(timing, sizeof timing, "%.2f s < %.0f s", secs, c.budget_s);
    else
      std::snprintf(timing, sizeof timing, "%.2f s", secs);
    std::printf("%s criterion %d: %s [%s] (%s)\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), timing);
    std::fflush(stdout);
  }
  return failures;
}
