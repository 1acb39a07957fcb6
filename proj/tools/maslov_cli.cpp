// Command line front end: spectrum, morse, scan, walk, verify, report.
//
// Exit codes: 0 pass, 1 other failure, 2 identity failure, 3 non-regular
// crossing, 4 config error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "maslov/config.hpp"
#include "maslov/errors.hpp"
#include "maslov/report.hpp"
#include "maslov/verifier.hpp"

using namespace maslov;

namespace {

enum Exit { kPass = 0, kOther = 1, kIdentity = 2, kNonRegular = 3, kConfig = 4 };

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

ExperimentConfig load(const Common& c) {
  std::vector<std::pair<std::string, std::string>> ov;
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
    ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!c.out.empty()) ov.emplace_back("output.dir", c.out);
  return load_config(c.config, ov);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& suffix) {
  std::filesystem::create_directories(cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / (cfg.prefix + suffix)).string();
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("output.dir: cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

void write_scan_files(const ExperimentConfig& cfg, const CrossingReport& r) {
  const std::string csv = out_path(cfg, "_crossings.csv");
  std::ofstream f(csv);
  if (!f) throw ConfigError("output.dir: cannot write '" + csv + "'");
  write_crossings_csv(f, r);
  write_curves(cfg.output_dir, cfg.prefix, r.flow);
}

void print_scan(const CrossingReport& r) {
  std::cout << "tau = " << r.tau << ", crossings: " << r.crossings.size() << '\n';
  for (const auto& e : r.crossings)
    std::cout << "  t* = " << format_double(e.t) << "  dim_C = " << e.dim_complex << "  dim_R = " << e.dim_real
              << "  signature = " << e.signature << (e.regular ? "" : "  (non-regular)") << '\n';
  std::cout << "Mor_C(tau) = " << r.morse_tau << ", Mor_C(1) = " << r.morse_one << ", Mor(V(0)) = " << r.morse_origin
            << ", Maslov (realified) = " << r.maslov << '\n';
}

void print_checks(const VerificationReport& r) {
  for (const auto& c : r.checks)
    std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.name << ": " << c.lhs << " vs " << c.rhs
              << (c.note.empty() ? "" : "  [" + c.note + "]") << '\n';
  std::cout << r.identity << ": " << (r.pass ? "pass" : "FAIL") << '\n';
}

int run_spectrum(const Common& c, double t) {
  const ExperimentConfig cfg = load(c);
  const SpectralResult r = eigendecompose(assemble(cfg.basis(), cfg.potential(), t), cfg.eps_ker);
  const std::string path = out_path(cfg, "_spectrum.csv");
  std::ofstream f(path);
  f << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) f << i << ',' << format_double(r.eigenvalues(i)) << '\n';
  std::cout << "t = " << t << ": " << r.eigenvalues.size() << " eigenvalues, Morse index " << morse_index(r)
            << ", kernel " << kernel_dim(r) << " -> " << path << '\n';
  return kPass;
}

int run_morse(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const Potential V = cfg.potential();
  const double tau = choose_tau(cfg);
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tau"] = tau;
  j["morse_tau"] = morse_count(cfg.basis(Field::Complex), V, tau, cfg.eps_ker);
  j["morse_one"] = morse_count(cfg.basis(Field::Complex), V, 1.0, cfg.eps_ker);
  j["morse_real_tau"] = morse_count(cfg.basis(Field::Realified), V, tau, cfg.eps_ker);
  j["morse_real_one"] = morse_count(cfg.basis(Field::Realified), V, 1.0, cfg.eps_ker);
  write_json(out_path(cfg, "_morse.json"), j);
  std::cout << j.dump(2) << '\n';
  return kPass;
}

int run_scan(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const CrossingReport r = scan_conjugate_points(cfg);
  write_scan_files(cfg, r);
  write_json(out_path(cfg, "_scan.json"), to_json(r));
  print_scan(r);
  return r.all_regular() ? kPass : kNonRegular;
}

int run_walk(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const VerificationReport r = rectangle_walk(cfg);
  write_json(out_path(cfg, "_walk.json"), to_json(r));
  for (const auto& [k, v] : r.ledger) std::cout << "  " << k << " = " << v << '\n';
  print_checks(r);
  return r.pass ? kPass : kIdentity;
}

int run_verify(const Common& c, std::string identity) {
  const ExperimentConfig cfg = load(c);
  if (identity.empty()) identity = cfg.identity;
  if (identity.empty()) throw ConfigError("solver.identity: no identity given");
  const VerificationReport r = verify_identity(cfg, identity);
  write_json(out_path(cfg, "_verify.json"), to_json(r));
  print_checks(r);
  return r.pass ? kPass : kIdentity;
}

int run_report(const Common& c) {
  const ExperimentConfig cfg = load(c);
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  const VerificationReport walk = rectangle_walk(cfg);
  write_scan_files(cfg, walk.scan);
  print_scan(walk.scan);
  j["scan"] = to_json(walk.scan);
  j["walk"] = to_json(walk);
  bool pass = walk.pass;
  print_checks(walk);
  if (!cfg.identity.empty()) {
    const VerificationReport v = verify_identity(cfg, cfg.identity);
    j["verify"] = to_json(v);
    pass = pass && v.pass;
    print_checks(v);
  }
  j["pass"] = pass;
  write_json(out_path(cfg, "_report.json"), j);
  return pass ? kPass : kIdentity;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morse and Maslov indices of Schrodinger operators on lattice cells"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config, "config file")->required();
    sub->add_option("--set", common.sets, "override, section.key=value (repeatable)");
    sub->add_option("-o,--out", common.out, "output directory (overrides output.dir)");
  };
  double t = 1.0;
  std::string identity;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues at one t");
  add_common(spectrum);
  spectrum->add_option("-t", t, "scale parameter in (0, 1]");
  auto* morse = app.add_subcommand("morse", "Morse indices at tau and 1");
  add_common(morse);
  auto* scan = app.add_subcommand("scan", "conjugate points on [tau, 1]");
  add_common(scan);
  auto* walk = app.add_subcommand("walk", "Maslov ledger around the rectangle");
  add_common(walk);
  auto* verify = app.add_subcommand("verify", "check one index identity");
  add_common(verify);
  verify->add_option("-i,--identity", identity, "identity name (default: solver.identity)");
  auto* report = app.add_subcommand("report", "scan, walk and verify in one JSON report");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kConfig;
  }

  try {
    if (*spectrum) return run_spectrum(common, t);
    if (*morse) return run_morse(common);
    if (*scan) return run_scan(common);
    if (*walk) return run_walk(common);
    if (*verify) return run_verify(common, identity);
    if (*report) return run_report(common);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const HypothesisViolation& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const UnresolvedCrossing& e) {
    std::cerr << e.what() << '\n';
    return kNonRegular;
  } catch (const NonRegularCrossing& e) {
    std::cerr << e.what() << '\n';
    return kNonRegular;
  } catch (const SumViolation& e) {
    std::cerr << e.what() << '\n';
    return kIdentity;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
