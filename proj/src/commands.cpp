#include "contactnh/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include <spdlog/spdlog.h>

#include "contactnh/brackets.hpp"
#include "contactnh/calculus.hpp"
#include "contactnh/integrator.hpp"
#include "contactnh/linalg.hpp"
#include "contactnh/sampling.hpp"

#ifndef CONTACTNH_VERSION
#define CONTACTNH_VERSION "unknown"
#endif

namespace contactnh::cli {

using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SyntaxError*>(&e) ||
      dynamic_cast<const UnknownVariable*>(&e) || dynamic_cast<const OffConstraint*>(&e)) {
    return kExitUsage;
  }
  return kExitNumerical;
}

std::string engine_version() { return CONTACTNH_VERSION; }

namespace {

std::string fixed17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

PhasePoint point_from_text(const std::string& text, int n) {
  const Vec v = parse_vector(text);
  if (v.size() != 2 * n + 1) {
    throw ConfigError("point needs " + std::to_string(2 * n + 1) + " comma-separated values");
  }
  return {n, v};
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

int simulate(const SystemConfig& cfg, const std::string& x0_text, const std::filesystem::path& out_dir,
             std::ostream& err) {
  const bool lagrangian = cfg.mode == SystemConfig::Mode::Lagrangian;
  const int n = cfg.n;
  Trajectory traj;
  std::optional<MechanicalSystem> mech;
  Vec x0;
  try {
    const ConstrainedSystem sys = build_system(cfg);
    mech = build_mechanical(cfg);
    x0 = point_from_text(x0_text, n).data();
    const IntegrationSettings s{cfg.t_end, cfg.h, cfg.project};
    spdlog::info("simulate: {} steps of h = {}", std::lround(cfg.t_end / cfg.h), cfg.h);
    traj = lagrangian ? integrate_lagrangian(*mech, LagrangianPoint::from_stacked(n, x0), s)
                      : integrate(sys, PhasePoint(n, x0), s);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "trajectory.csv");
    if (!csv) throw ConfigError("cannot write " + (out_dir / "trajectory.csv").string());
    csv << "t";
    for (int i = 1; i <= n; ++i) csv << ",q" << i;
    for (int i = 1; i <= n; ++i) csv << ",p" << i;
    csv << ",z,drift,H\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
      Vec row = traj.states[k];
      if (lagrangian) row = legendre(*mech, LagrangianPoint::from_stacked(n, row)).data();
      csv << fixed17(traj.times[k]);
      for (Eigen::Index i = 0; i < row.size(); ++i) csv << ',' << fixed17(row(i));
      csv << ',' << fixed17(traj.drift[k]) << ',' << fixed17(traj.energy[k]) << '\n';
    }

    json manifest;
    manifest["command"] = "simulate";
    manifest["engine_version"] = engine_version();
    manifest["config"] = to_text(cfg);
    manifest["mode"] = lagrangian ? "lagrangian" : "hamiltonian";
    manifest["x0"] = vec_json(x0);
    manifest["seed"] = cfg.seed;
    manifest["rows"] = traj.size();
    manifest["max_drift"] = traj.max_drift();
    manifest["csv_state"] = lagrangian ? "legendre image (q, p = g v, z); H column is E_L" : "(q, p, z)";
    manifest["tolerances"] = {{"on_M", "1e-8*(1+|x|inf)"},
                              {"projection_newton", "1e-12*(1+|x|inf), at most 10 iterations"},
                              {"rank", "singular values above 1e-9*sigma_max"}};
    manifest["error"] = traj.error ? json(*traj.error) : json(nullptr);
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (traj.error) {
    err << "error: " << *traj.error << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

namespace {

class Report {
 public:
  void record(const std::string& name, double tolerance, double residual) {
    Entry& e = entry(name, tolerance);
    if (!std::isfinite(residual)) {
      e.pass = false;
      e.nonfinite = true;
      return;
    }
    e.max_residual = std::max(e.max_residual, residual);
    e.pass = e.pass && residual <= tolerance;
  }

  void fail(const std::string& name, double tolerance, const std::string& why) {
    Entry& e = entry(name, tolerance);
    e.pass = false;
    if (e.error.empty()) e.error = why;
  }

  void skip(const std::string& name, const std::string& reason) { skipped_[name] = reason; }

  /// A control that must trip: passes iff the violation was observed.
  void control(const std::string& name, double tolerance, double residual, bool tripped, const std::string& note) {
    Entry& e = entry(name, tolerance);
    e.max_residual = residual;
    e.pass = tripped;
    e.expect_violation = true;
    e.error = note;
  }

  template <class F>
  void guarded(const std::string& name, double tolerance, F&& f) {
    try {
      f();
    } catch (const EngineError& e) {
      fail(name, tolerance, e.what());
    }
  }

  json to_json() const {
    json out = json::object();
    for (const auto& [name, e] : entries_) {
      json j = {{"max_residual", e.nonfinite ? json(nullptr) : json(e.max_residual)},
                {"tolerance", e.tolerance},
                {"pass", e.pass}};
      if (e.expect_violation) j["expect_violation"] = true;
      if (!e.error.empty()) j[e.expect_violation ? "observed" : "error"] = e.error;
      out[name] = j;
    }
    for (const auto& [name, reason] : skipped_) {
      if (!entries_.count(name)) out[name] = {{"skipped", true}, {"reason", reason}};
    }
    return out;
  }

 private:
  struct Entry {
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    bool nonfinite = false;
    bool expect_violation = false;
    std::string error;
  };

  Entry& entry(const std::string& name, double tolerance) {
    auto [it, inserted] = entries_.try_emplace(name);
    if (inserted) it->second.tolerance = tolerance;
    return it->second;
  }

  std::map<std::string, Entry> entries_;
  std::map<std::string, std::string> skipped_;
};

double matrix_norm(const Mat& A) { return A.size() ? A.lpNorm<Eigen::Infinity>() : 0.0; }

double projector_algebra_residual(const Mat& P) {
  const Mat Q = Mat::Identity(P.rows(), P.cols()) - P;
  return std::max({matrix_norm(P * P - P), matrix_norm(Q * Q - Q), matrix_norm(P * Q), matrix_norm(Q * P)});
}

void negative_controls(Report& r, const ConstrainedSystem& sys, const PhasePoint& x) {
  const int n = sys.n();
  const double scale = sys.scale(x);

  if (sys.k() + 1 <= 2 * n + 1) {
    ForceForm dz{std::vector<expr::Expr>(static_cast<std::size_t>(n)), std::vector<expr::Expr>(static_cast<std::size_t>(n)),
                 expr::Expr::constant(1.0)};
    const StructuralReport s = structural_checks(sys.with_extra_force(dz), x);
    r.control("negative.reeb_in_F_with_dz", 1e-9, s.reeb_residual / scale, !s.reeb_in_F,
              s.reeb_in_F ? "reeb_in_F stayed true" : "reeb_in_F false");
  } else {
    r.skip("negative.reeb_in_F_with_dz", "force basis already has 2n+1 forms");
  }

  // Duplicating a force form makes C rank deficient; without constraints or
  // forces use phi = z with Psi = dq1, whose force field is tangent to M.
  r.guarded("negative.singular_c", 1e-9, [&] {
    std::optional<ConstrainedSystem> bad;
    PhasePoint at = x;
    if (sys.m() >= 1 && sys.k() >= 1 && sys.k() + 1 <= 2 * n + 1) {
      bad = sys.with_extra_force(sys.forces().front());
    } else {
      ForceForm dq1{std::vector<expr::Expr>(static_cast<std::size_t>(n)),
                    std::vector<expr::Expr>(static_cast<std::size_t>(n)), expr::Expr()};
      dq1.dq[0] = expr::Expr::constant(1.0);
      bad.emplace(n, sys.H().expr(), std::vector<expr::Expr>{expr::Expr::variable({expr::VarKind::Z, 0})},
                  std::vector<ForceForm>{dq1});
      at.z() = 0.0;
    }
    const Mat C = c_matrix(*bad, at);
    Eigen::JacobiSVD<Mat> svd(C);
    const Vec& sv = svd.singularValues();
    const double ratio = (sv.size() < bad->k() || sv(0) == 0.0) ? 0.0 : sv(sv.size() - 1) / sv(0);
    bool raised = false;
    try {
      constrained_vector(*bad, at);
    } catch (const SingularC&) {
      raised = true;
    }
    r.control("negative.singular_c", 1e-9, ratio, raised, raised ? "SingularC raised" : "no error raised");
  });

  if (sys.m() >= 1) {
    const OneFormValue d = sys.constraints().front().gradient(x);
    const double norm2 = d.data().squaredNorm();
    if (norm2 > 0.0) {
      PhasePoint off(n, x.data() + (1e-3 * (1.0 + x.inf_norm()) / norm2) * d.data());
      bool raised = false;
      try {
        integrate(sys, off, {0.01, 1e-3, false});
      } catch (const OffConstraint&) {
        raised = true;
      } catch (const EngineError&) {
      }
      r.control("negative.off_constraint", sys.tol_on_M(off), sys.violation(off), raised,
                raised ? "OffConstraint raised" : "no OffConstraint");
    } else {
      r.skip("negative.off_constraint", "constraint gradient vanishes at the sample point");
    }
  } else {
    r.skip("negative.off_constraint", "no constraints, every point is on M");
  }
}

}  // namespace

json verify_report(const SystemConfig& cfg, int samples, std::uint64_t seed) {
  const ConstrainedSystem sys = build_system(cfg);
  const auto mech = build_mechanical(cfg);
  const int n = sys.n();
  const int dim = sys.dim();
  UniformSource src(seed);
  const auto points = sample_on_M(sys, samples, src);

  std::vector<ScalarField> funcs;
  for (int i = 0; i < 6; ++i) funcs.push_back(random_polynomial(n, src));
  funcs.emplace_back(expr::Expr::variable({expr::VarKind::Q, 0}), n);
  const std::size_t nf = funcs.size();

  Report r;
  const bool unconstrained = sys.m() == 0 && sys.k() == 0;
  const char* constrained_names[] = {"uniqueness", "existence", "tangency", "force_membership", "equivalence",
                                     "projector_algebra", "projector_coincidence", "structural.reeb_in_F",
                                     "structural.F_self_orthogonal", "structural.mechanical", "casimir",
                                     "identities.energy", "identities.eta", "integrator.drift"};

  bool structural_everywhere = true;
  bool reeb_everywhere = true;
  if (unconstrained) {
    for (const char* name : constrained_names) r.skip(name, "no constraints and no forces");
  } else {
    for (const auto& x : points) {
      const StructuralReport s = structural_checks(sys, x);
      const double scale = sys.scale(x);
      r.record("structural.reeb_in_F", 1e-9, s.reeb_residual / scale);
      r.record("structural.F_self_orthogonal", 1e-9, s.orthogonality_residual / scale);
      r.record("structural.mechanical", 1e-9, s.mechanical_residual / scale);
      structural_everywhere = structural_everywhere && s.all();
      reeb_everywhere = reeb_everywhere && s.reeb_in_F;
    }
  }

  std::vector<BracketKind> kinds{BracketKind::Nonholonomic};
  if (!unconstrained && structural_everywhere) kinds.push_back(BracketKind::PNonholonomic);
  if (sys.splitting()) kinds.push_back(BracketKind::Eden);
  if (!unconstrained && !structural_everywhere) {
    r.skip("projector_coincidence", "structural conditions fail, roman-P projector undefined");
  }
  if (!unconstrained && !reeb_everywhere) r.skip("equivalence", "Reeb field is not in F");
  if (!mech) r.skip("legendre", "hamiltonian mode");

  for (std::size_t i = 0; i < points.size(); ++i) {
    const PhasePoint& x = points[i];
    const double scale = sys.scale(x);
    const double h_value = sys.H()(x);
    const double rh = sys.H().gradient(x).z();

    {
      const OneFormValue a(n, src.vector(dim, -1.0, 1.0));
      const VectorValue v(n, src.vector(dim, -1.0, 1.0));
      const double e1 = (contact::flat_at(x, contact::sharp_at(x, a)) - a).inf_norm();
      const double e2 = (contact::sharp_at(x, contact::flat_at(x, v)) - v).inf_norm();
      r.record("contact.isomorphism", 1e-12, std::max(e1, e2) / (1.0 + x.inf_norm()));
    }

    r.guarded("dissipation.energy", 1e-8, [&] {
      const VectorValue xh = sys.hamiltonian_field().value(x);
      r.record("dissipation.energy", 1e-8, std::abs(pair(sys.H().gradient(x), xh) + rh * h_value) / scale);
    });
    r.guarded("dissipation.eta", 1e-8, [&] {
      const OneFormValue e = lie_eta(sys.hamiltonian_field(), x) + rh * contact::eta(x);
      r.record("dissipation.eta", 1e-8, e.inf_norm() / scale);
    });
    r.guarded("dissipation.divergence", 1e-8, [&] {
      r.record("dissipation.divergence", 1e-8,
               std::abs(divergence(sys.hamiltonian_field(), x) + (n + 1) * rh) / scale);
    });

    if (!unconstrained) {
      r.guarded("uniqueness", 0.0, [&] {
        const UniquenessReport u = uniqueness_check(sys, x);
        r.record("uniqueness", 0.0, static_cast<double>(sys.k() - u.rank));
      });
      r.guarded("existence", 1e-8, [&] {
        r.record("existence", 1e-8, existence_check(sys, x).residual / scale);
      });
      r.guarded("tangency", 1e-9, [&] {
        r.record("tangency", 1e-9, tangency_residual(sys, x, constrained_vector(sys, x)) / scale);
      });
      r.guarded("force_membership", 1e-9, [&] {
        r.record("force_membership", 1e-9, force_membership_residual(sys, x, constrained_vector(sys, x)) / scale);
      });
      r.guarded("projector_algebra", 1e-10, [&] {
        r.record("projector_algebra", 1e-10, projector_algebra_residual(projector_matrix(sys, x)));
        if (structural_everywhere) {
          r.record("projector_algebra", 1e-10, projector_algebra_residual(roman_p_matrix(sys, x)));
        }
      });
      if (structural_everywhere) {
        r.guarded("projector_coincidence", 1e-9, [&] {
          const VectorValue xh = sys.hamiltonian_field().value(x);
          const double d = (roman_p_projector(sys, x, xh) - projector_P(sys, x, xh)).inf_norm();
          r.record("projector_coincidence", 1e-9, d / scale);
        });
      }
      try {
        const IdentityReport id = identity_report(sys, x);
        r.record("identities.energy", 1e-7, id.energy_residual / scale);
        r.record("identities.eta", 1e-7, id.eta_residual / scale);
      } catch (const EngineError& e) {
        r.fail("identities.energy", 1e-7, e.what());
        r.fail("identities.eta", 1e-7, e.what());
      }
      if (reeb_everywhere) {
        r.guarded("equivalence", 1e-7, [&] {
          const VectorFieldPtr X = constrained_vf(sys, Membership::Extend);
          const EquivalenceReport base = equivalence_check(sys, x, *X);
          r.record("equivalence", 1e-7, std::max(base.contact_residual, base.lie_residual) / scale);
          std::vector<std::pair<std::string, VectorFieldPtr>> perturbations;
          const VectorValue R = contact::reeb(n);
          const VectorValue dp1 = basis_element<VectorValue>(n, n);
          perturbations.emplace_back("reeb", std::make_shared<FunctionVectorField>(
                                                 n, [X, R](const PhasePoint& y) { return X->value(y) + 0.5 * R; }));
          perturbations.emplace_back("dp1", std::make_shared<FunctionVectorField>(
                                                n, [X, dp1](const PhasePoint& y) { return X->value(y) + 0.5 * dp1; }));
          if (sys.k() > 0) {
            perturbations.emplace_back("force", std::make_shared<FunctionVectorField>(n, [X, &sys](const PhasePoint& y) {
                                         return X->value(y) + 0.5 * contact::sharp_at(y, sys.force_form(0, y));
                                       }));
          }
          for (const auto& [name, field] : perturbations) {
            const EquivalenceReport e = equivalence_check(sys, x, *field);
            if (e.contact_holds() != e.lie_holds()) {
              r.fail("equivalence", 1e-7, "readings disagree under the " + name + " perturbation");
            }
          }
        });
      }
      for (int a = 0; a < sys.m(); ++a) {
        for (BracketKind kind : kinds) {
          r.guarded("casimir", 1e-9, [&] {
            for (std::size_t j = 0; j < nf; ++j) {
              r.record("casimir", 1e-9,
                       std::abs(bracket(sys, kind, sys.constraints()[static_cast<std::size_t>(a)], funcs[j], x)) / scale);
            }
          });
        }
      }
    }

    for (BracketKind kind : kinds) {
      r.guarded("evolution", 1e-8, [&] {
        for (const auto& f : funcs) r.record("evolution", 1e-8, evolution_residual(sys, kind, f, x) / scale);
      });
      r.guarded("leibniz", 1e-8, [&] {
        for (std::size_t j = 0; j < nf; ++j) {
          const double d = leibniz_defect(sys, kind, funcs[j], funcs[(j + 1) % nf], funcs[(j + 2) % nf], x);
          r.record("leibniz", 1e-8, std::abs(d) / scale);
        }
      });
    }

    r.guarded("bracket_coincidence", 1e-8, [&] {
      for (std::size_t j = 0; j < nf; ++j) {
        const ScalarField& f = funcs[j];
        const ScalarField& g = funcs[(j + 1) % nf];
        const double reference = unconstrained ? contact::jacobi_bracket(f, g, x) : nh_bracket(sys, f, g, x);
        for (BracketKind kind : kinds) {
          r.record("bracket_coincidence", 1e-8, std::abs(bracket(sys, kind, f, g, x) - reference) / scale);
        }
      }
    });

    if (mech) {
      r.guarded("legendre.correspondence", 1e-8, [&] {
        const LagrangianPoint xl = legendre_inverse(*mech, x);
        const Vec w = src.vector(dim, -1.0, 1.0);
        const double pullback = std::abs(pair(contact::eta(x), legendre_tangent(*mech, xl, w)) -
                                         energy_and_form(*mech, xl).eta_L.data().dot(w));
        r.record("legendre.pullback", 1e-8, pullback / scale);
        r.record("legendre.energy", 1e-8, std::abs(h_value - energy_and_form(*mech, xl).energy) / scale);
        r.record("legendre.correspondence", 1e-8, correspondence_residual(*mech, sys, xl) / scale);
      });
    }
  }

  if (!unconstrained) {
    const double tol = cfg.project ? 1e-9 : 1e-6;
    r.guarded("integrator.drift", tol, [&] {
      const Trajectory t = integrate(sys, points.front(), {std::min(cfg.t_end, 10.0), cfg.h, cfg.project});
      if (t.error) r.fail("integrator.drift", tol, *t.error);
      r.record("integrator.drift", tol, t.max_drift());
    });
  }

  negative_controls(r, sys, points.front());
  return r.to_json();
}

bool report_passes(const json& report) {
  for (const auto& [name, entry] : report.items()) {
    if (entry.contains("pass") && !entry["pass"].get<bool>()) return false;
  }
  return true;
}

int verify(const SystemConfig& cfg, int samples, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  json report;
  try {
    report = verify_report(cfg, samples, seed);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  out << report.dump(2) << "\n";
  if (!report_passes(report)) {
    for (const auto& [name, entry] : report.items()) {
      if (entry.contains("pass") && !entry["pass"].get<bool>()) spdlog::error("check failed: {}", name);
    }
    return kExitNumerical;
  }
  return kExitOk;
}

json bracket_report(const SystemConfig& cfg, const std::string& f_text, const std::string& g_text,
                    const std::string& point) {
  const ConstrainedSystem sys = build_system(cfg);
  const PhasePoint x = point_from_text(point, sys.n());
  sys.require_on_M(x);
  const ScalarField f = ScalarField::parse(f_text, sys.n());
  const ScalarField g = ScalarField::parse(g_text, sys.n());

  json out;
  json unavailable = json::object();
  out["nh"] = nh_bracket(sys, f, g, x);
  try {
    out["p_nh"] = p_nh_bracket(sys, f, g, x);
  } catch (const PreconditionFailed& e) {
    out["p_nh"] = nullptr;
    unavailable["p_nh"] = e.what();
  }
  if (sys.splitting()) {
    out["eden"] = eden_bracket(sys, f, g, x);
  } else {
    out["eden"] = nullptr;
    unavailable["eden"] = "system is not induced from a mechanical Lagrangian";
  }
  out["jacobiator_sample"] = jacobiator(sys, BracketKind::Nonholonomic, f, g, sys.H(), x);
  out["leibniz_defect"] = leibniz_defect(sys, BracketKind::Nonholonomic, f, g, sys.H(), x);
  if (!unavailable.empty()) out["unavailable"] = unavailable;
  return out;
}

int bracket(const SystemConfig& cfg, const std::string& f, const std::string& g, const std::string& point,
            std::ostream& out, std::ostream& err) {
  try {
    out << bracket_report(cfg, f, g, point).dump(2) << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace contactnh::cli
