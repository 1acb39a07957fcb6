#include "maslov/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "maslov/collocation.hpp"
#include "maslov/errors.hpp"
#include "maslov/shooting.hpp"

namespace maslov {

namespace {

constexpr double kTauFloor = 1e-4;

int negatives(const Eigen::MatrixXd& S) {
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues();
  return static_cast<int>((ev.array() < 0.0).count());
}

bool invertible(const Eigen::MatrixXd& S) {
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues();
  return ev.cwiseAbs().minCoeff() > 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

bool theta_zero(const ExperimentConfig& cfg) { return cfg.theta.size() == 0 || cfg.theta.isZero(0.0); }

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& F) {
  const Eigen::MatrixXcd H = 0.5 * (F + F.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H, Eigen::EigenvaluesOnly).eigenvalues();
}

CrossingSearchOptions search_options(const ExperimentConfig& cfg) {
  CrossingSearchOptions so;
  so.t_tol = cfg.t_tol;
  so.grid_points = cfg.t_grid;
  so.eps_ker = cfg.eps_ker;
  return so;
}

int default_nodes(int n) { return n == 1 ? 40 : 22; }

// Forms at one Galerkin crossing.  The collocation kernel is used when the
// cell allows it; otherwise the Galerkin kernel itself.
void evaluate_forms(const ExperimentConfig& cfg, const BasisSpec& basis, const Potential& V, const ZeroCrossing& z,
                    CrossingEntry& e) {
  const Lattice& lat = basis.lattice;
  const int n = lat.dim;
  const bool rect = lat.is_rectangular();
  std::vector<FieldSampler> u;
  double t_form = z.t;
  if (rect && n <= 2) {
    try {
      const ChebyshevCollocation col(basis, cfg.collocation_n > 0 ? cfg.collocation_n : default_nodes(n));
      const RefinedKernel rk = col.refine(V, z.t, z.dim);
      for (int q = 0; q < rk.dim(); ++q) u.push_back(col.sampler(rk.values.col(q)));
      t_form = rk.t;
      e.refined = true;
    } catch (const Error&) {
      // Drift past the ends of [tau, 1] or no convergence: keep the Galerkin kernel.
      u.clear();
    }
  }
  Eigen::MatrixXcd Fv;
  if (e.refined) {
    Fv = volume_form(u, V, t_form);
  } else {
    Fv = z.kernel.adjoint() * assemble_radial(basis, V, z.t) * z.kernel;
    for (int q = 0; q < z.dim; ++q) {
      const Eigen::VectorXcd c = z.kernel.col(q);
      u.push_back([&basis, c](const Eigen::VectorXd& x) { return reconstruct(basis, c, x); });
    }
  }
  e.t_refined = t_form;
  e.form_volume = hermitian_eigenvalues(Fv);
  if (rect && n <= 2) {
    const Eigen::MatrixXcd Fb = boundary_form(u, V, t_form);
    e.form_boundary = hermitian_eigenvalues(Fb);
    e.formula_gap = (Fv - Fb).norm() / std::max(Fv.norm(), 1e-300);
  }
}

}  // namespace

int CrossingEntry::negative() const { return static_cast<int>((form_volume.array() < 0.0).count()); }
int CrossingEntry::positive() const { return static_cast<int>((form_volume.array() > 0.0).count()); }

bool CrossingReport::all_regular() const {
  return std::all_of(crossings.begin(), crossings.end(), [](const CrossingEntry& e) { return e.regular; });
}

int CrossingReport::dim_sum(bool include_tau, bool include_one) const {
  int s = 0;
  for (const auto& e : crossings) {
    if (e.at_tau && !include_tau) continue;
    if (e.at_one && !include_one) continue;
    s += e.dim_complex;
  }
  return s;
}

double choose_tau(const ExperimentConfig& cfg) {
  if (!cfg.auto_tau) return cfg.tau;
  const Potential V = cfg.potential();
  const BasisSpec b = cfg.basis(Field::Complex);
  const bool vanishing = cfg.bc == Boundary::Dirichlet || (cfg.bc == Boundary::Theta && !theta_zero(cfg));
  const int target = vanishing ? 0 : negatives(V.value_at_origin());
  auto ok = [&](double tau) {
    try {
      const SpectralResult r = eigendecompose(assemble(b, V, tau), cfg.eps_ker);
      return morse_index(r) == target && kernel_dim(r) == 0;
    } catch (const BoundaryAmbiguity&) {
      return false;
    }
  };
  for (double tau = cfg.tau; tau >= kTauFloor; tau *= 0.5) {
    if (!ok(tau)) continue;
    if (!vanishing && !ok(0.5 * tau)) continue;
    return tau;
  }
  std::ostringstream os;
  os << "no tau in [" << kTauFloor << ", " << cfg.tau << "] gives Mor = " << target << " with trivial kernel";
  throw HypothesisViolation(os.str());
}

CrossingReport scan_conjugate_points(const ExperimentConfig& cfg) {
  const Potential V = cfg.potential();
  const BasisSpec bc = cfg.basis(Field::Complex), br = cfg.basis(Field::Realified);
  const CrossingSearchOptions so = search_options(cfg);

  CrossingReport rep;
  rep.tau = choose_tau(cfg);
  rep.lambda_inf = -V.sup_norm_bound() - 1.0;
  rep.morse_tau = morse_count(bc, V, rep.tau, cfg.eps_ker);
  rep.morse_one = morse_count(bc, V, 1.0, cfg.eps_ker);
  rep.morse_real_tau = morse_count(br, V, rep.tau, cfg.eps_ker);
  rep.morse_real_one = morse_count(br, V, 1.0, cfg.eps_ker);
  rep.morse_origin = negatives(V.value_at_origin());

  const auto zs = find_zero_crossings(bc, V, rep.tau, 1.0, so, &rep.flow);
  for (const auto& z : zs) {
    CrossingEntry e;
    e.t = z.t;
    e.dim_complex = z.dim;
    e.dim_real = kernel_at(br, V, z.t, so).dim;
    e.slopes = z.slopes;
    e.at_tau = std::abs(z.t - rep.tau) <= cfg.t_tol;
    e.at_one = std::abs(z.t - 1.0) <= cfg.t_tol;
    evaluate_forms(cfg, bc, V, z, e);
    // Relative threshold eps_form * ||F||.
    e.regular = e.form_volume.cwiseAbs().minCoeff() > cfg.eps_form * e.form_volume.cwiseAbs().maxCoeff();
    e.signature = e.positive() - e.negative();
    for (int q = 0; q < z.dim; ++q)
      if ((e.slopes(q) < 0) != (e.form_volume(q) < 0)) e.slopes_agree = false;
    if (e.regular) {
      if (e.at_tau) rep.maslov -= 2 * e.negative();
      else if (e.at_one) rep.maslov += 2 * e.positive();
      else rep.maslov += 2 * e.signature;
    }
    rep.crossings.push_back(std::move(e));
  }
  return rep;
}

void VerificationReport::add(std::string name, double lhs, double rhs, std::string note) {
  checks.push_back({std::move(name), lhs, rhs, lhs == rhs, std::move(note)});
}

void VerificationReport::finish() {
  pass = !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

VerificationReport rectangle_walk(const ExperimentConfig& cfg, bool strict) {
  VerificationReport rep;
  rep.identity = "rectangle_walk";
  rep.scan = scan_conjugate_points(cfg);
  const CrossingReport& s = rep.scan;
  if (!s.all_regular()) throw UnresolvedCrossing("degenerate crossing form on the t-side");
  const Potential V = cfg.potential();
  const double tau = s.tau, lam = s.lambda_inf;

  // The lambda_inf side: no eigenvalue may reach lambda_inf along t.
  const BasisSpec bc = cfg.basis(Field::Complex);
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 16; ++i) {
    const double t = tau + (1.0 - tau) * i / 16.0;
    lowest = std::min(lowest, eigendecompose(assemble(bc, V, t), cfg.eps_ker).eigenvalues(0));
  }

  int s1 = -s.morse_real_tau, s2 = s.maslov, s3 = s.morse_real_one, s4 = 0;
  bool side4_free = lowest > lam;
  if (V.dim() == 1) {
    Maslov1dOptions o;
    o.theta = cfg.bc == Boundary::Theta ? cfg.theta(0) : 0.0;
    const Route r = Route::CrossingForms;
    s1 = maslov_1d_lambda(V, cfg.bc, tau, lam, 0.0, r, o).maslov;
    s2 = maslov_1d(V, cfg.bc, tau, r, o).maslov;
    s3 = -maslov_1d_lambda(V, cfg.bc, 1.0, lam, 0.0, r, o).maslov;
    Maslov1dOptions o4 = o;
    o4.lambda = lam;
    const Maslov1dResult r4 = maslov_1d(V, cfg.bc, tau, r, o4);
    s4 = -r4.maslov;
    side4_free = side4_free && r4.crossings.empty();
    rep.add("sigma1 shooting = -Mor_R(tau)", s1, -s.morse_real_tau);
    rep.add("sigma2 shooting = scan", s2, s.maslov);
    rep.add("sigma3 shooting = Mor_R(1)", s3, s.morse_real_one);
  }
  rep.ledger = {{"sigma1", s1}, {"sigma2", s2}, {"sigma3", s3}, {"sigma4", s4}, {"total", s1 + s2 + s3 + s4}};
  rep.add("sigma4 crossing-free", side4_free ? 1 : 0, 1);
  rep.add("total Maslov over the rectangle", s1 + s2 + s3 + s4, 0);
  rep.finish();
  if (strict && !rep.pass) {
    std::ostringstream os;
    for (const auto& [k, v] : rep.ledger) os << k << " = " << v << "; ";
    os << "sigma4 crossing-free = " << (side4_free ? "yes" : "no");
    throw SumViolation(os.str());
  }
  return rep;
}

const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names = {
      "quasi_periodic", "quasi_periodic_iii", "quasi_periodic_iv", "periodic", "periodic_iii",
      "periodic_iv",    "dirichlet",          "dirichlet_sum",     "neumann",  "small_tau_morse"};
  return names;
}

namespace {

// Sign of D_t on a cell grid over [tau, 1], and at the detected crossings.
struct HypothesisState {
  bool iii = false, iv = false;
};

HypothesisState hypotheses(const Potential& V, const CrossingReport& scan) {
  std::vector<double> ts;
  for (int i = 0; i <= 32; ++i) ts.push_back(scan.tau + (1.0 - scan.tau) * i / 32.0);
  const HypothesisResult h = hypothesis_check(V, ts, cell_grid(V.lattice(), V.dim() == 1 ? 64 : 24));
  HypothesisState st;
  st.iii = h.which == Hypothesis::PositiveDerivative;
  st.iv = h.which == Hypothesis::NegativeDerivative;
  // Definite forms at every conjugate point are enough.
  bool pos = true, neg = true;
  for (const auto& e : scan.crossings) {
    pos = pos && e.negative() == 0;
    neg = neg && e.positive() == 0;
  }
  st.iii = st.iii || pos;
  st.iv = st.iv || neg;
  // In one dimension a negative definite V suffices for the (iv) identity.
  if (V.dim() == 1 && !st.iv) {
    bool negdef = true;
    const CellGrid g = cell_grid(V.lattice(), 256);
    for (Eigen::Index i = 0; i < g.size() && negdef; ++i)
      negdef = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(V.eval(g.nodes.col(i)),
                                                              Eigen::EigenvaluesOnly)
                   .eigenvalues()
                   .maxCoeff() < 0.0;
    st.iv = negdef;
  }
  return st;
}

void require(bool ok, const std::string& identity, const std::string& what) {
  if (!ok) throw HypothesisViolation(identity + ": " + what);
}

}  // namespace

VerificationReport verify_identity(const ExperimentConfig& cfg, const std::string& id) {
  const auto& names = identity_names();
  if (std::find(names.begin(), names.end(), id) == names.end()) throw ConfigError("solver.identity: unknown identity '" + id + "'");
  const Potential V = cfg.potential();
  const bool quasi = id.rfind("quasi_periodic", 0) == 0;
  const bool periodic = id.rfind("periodic", 0) == 0 || id == "small_tau_morse";
  if (quasi) require(cfg.bc == Boundary::Theta && !theta_zero(cfg), id, "needs theta-periodic conditions with theta != 0");
  if (periodic) require(cfg.bc == Boundary::Theta && theta_zero(cfg), id, "needs periodic conditions (theta = 0)");
  if (id.rfind("dirichlet", 0) == 0) require(cfg.bc == Boundary::Dirichlet, id, "needs Dirichlet conditions");
  if (id == "neumann") require(cfg.bc == Boundary::Neumann, id, "needs Neumann conditions");
  if (periodic || id == "neumann") require(invertible(V.value_at_origin()), id, "V(0) must be invertible");

  VerificationReport rep;
  rep.identity = id;
  const int mor0 = negatives(V.value_at_origin());

  if (id == "small_tau_morse") {
    const double tau = choose_tau(cfg);
    const SpectralResult rc = eigendecompose(assemble(cfg.basis(Field::Complex), V, tau), cfg.eps_ker);
    const SpectralResult rr = eigendecompose(assemble(cfg.basis(Field::Realified), V, tau), cfg.eps_ker);
    rep.scan.tau = tau;
    rep.scan.morse_tau = morse_index(rc);
    rep.scan.morse_real_tau = morse_index(rr);
    rep.scan.morse_origin = mor0;
    rep.add("Mor_C(tau) = Mor(V(0))", morse_index(rc), mor0);
    rep.add("Mor_R(tau) = 2 Mor(V(0))", morse_index(rr), 2 * mor0);
    rep.add("dim ker at tau = 0", kernel_dim(rc), 0);
    rep.finish();
    return rep;
  }

  rep.scan = scan_conjugate_points(cfg);
  const CrossingReport& s = rep.scan;
  for (const auto& e : s.crossings)
    if (!e.regular) {
      std::ostringstream os;
      os << "degenerate crossing form at t = " << e.t;
      throw UnresolvedCrossing(os.str());
    }
  const int mor = s.morse_one;
  const int mas = s.maslov;

  const bool needs_iii = id == "quasi_periodic_iii" || id == "periodic_iii";
  const bool needs_iv = id == "quasi_periodic_iv" || id == "periodic_iv";
  if (needs_iii || needs_iv) {
    const HypothesisState h = hypotheses(V, s);
    if (needs_iii) require(h.iii, id, "D_t is not positive definite (nor at the conjugate points)");
    if (needs_iv) require(h.iv, id, "D_t is not negative definite (nor at the conjugate points)");
  }

  // Independent Maslov indices from shooting for n = 1.
  auto shooting_checks = [&](int lhs, const std::string& label, int offset) {
    if (V.dim() != 1) return;
    Maslov1dOptions o;
    o.theta = cfg.bc == Boundary::Theta ? cfg.theta(0) : 0.0;
    for (Route r : {Route::SpectralFlow, Route::CrossingForms}) {
      const int m1 = maslov_1d(V, cfg.bc, s.tau, r, o).maslov;
      rep.add(label + " (shooting, " + to_string(r) + ")", lhs, -m1 + offset);
    }
  };

  if (id == "quasi_periodic") {
    rep.add("Mor_C(tau) = 0", s.morse_tau, 0);
    rep.add("2 Mor_C = -Mas", 2 * mor, -mas);
    shooting_checks(2 * mor, "2 Mor_C = -Mas", 0);
  } else if (id == "quasi_periodic_iii") {
    rep.add("Mor_C = 0", mor, 0);
  } else if (id == "quasi_periodic_iv") {
    rep.add("Mor_C = sum_{tau <= t < 1} dim_C ker", mor, s.dim_sum(true, false));
  } else if (id == "periodic") {
    rep.add("Mor_C(tau) = Mor(V(0))", s.morse_tau, mor0);
    rep.add("2 Mor_C - 2 Mor(V(0)) = -Mas", 2 * mor - 2 * mor0, -mas);
    shooting_checks(2 * mor - 2 * mor0, "2 Mor_C - 2 Mor(V(0)) = -Mas", 0);
  } else if (id == "periodic_iii") {
    rep.add("Mor_C - Mor(V(0)) = -sum_{tau < t <= 1} dim_C ker", mor - mor0, -s.dim_sum(false, true));
  } else if (id == "periodic_iv") {
    rep.add("Mor_C - Mor(V(0)) = sum_{tau <= t < 1} dim_C ker", mor - mor0, s.dim_sum(true, false));
  } else if (id == "dirichlet") {
    rep.add("2 Mor_C = -Mas", 2 * mor, -mas);
    shooting_checks(2 * mor, "2 Mor_C = -Mas", 0);
  } else if (id == "dirichlet_sum") {
    rep.add("Mor_C = sum_{tau <= t < 1} dim_C ker", mor, s.dim_sum(true, false));
  } else if (id == "neumann") {
    rep.add("Mor_C(tau) = Mor(V(0))", s.morse_tau, mor0);
    rep.add("2 Mor_C = -Mas + 2 Mor(V(0))", 2 * mor, -mas + 2 * mor0);
    shooting_checks(2 * mor, "2 Mor_C = -Mas + 2 Mor(V(0))", 2 * mor0);
  }
  for (const auto& e : s.crossings) {
    std::ostringstream os;
    os << "t = " << e.t;
    rep.add("dim_R = 2 dim_C", e.dim_real, 2 * e.dim_complex, os.str());
  }
  rep.add("Mor_R(1) = 2 Mor_C(1)", s.morse_real_one, 2 * mor);
  rep.finish();
  return rep;
}

}  // namespace maslov
