#include "maslov/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "maslov/errors.hpp"

namespace maslov {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_crossings_csv(std::ostream& os, const CrossingReport& r) {
  os << "t_star,dim_C,dim_R,signature,form_volume,form_boundary,slope\n";
  for (const auto& e : r.crossings)
    for (int q = 0; q < e.dim_complex; ++q) {
      os << format_double(e.t) << ',' << e.dim_complex << ',' << e.dim_real << ',' << e.signature << ','
         << format_double(e.form_volume(q)) << ',';
      if (e.form_boundary.size() > q) os << format_double(e.form_boundary(q));
      os << ',' << format_double(e.slopes(q)) << '\n';
    }
}

void write_curve_csv(std::ostream& os, const EigenFlow& flow, Eigen::Index j) {
  os << "t,lambda\n";
  for (std::size_t i = 0; i < flow.t.size(); ++i)
    os << format_double(flow.t[i]) << ',' << format_double(flow.curves(static_cast<Eigen::Index>(i), j)) << '\n';
}

std::vector<std::string> write_curves(const std::string& dir, const std::string& prefix, const EigenFlow& flow) {
  std::vector<std::string> paths;
  for (Eigen::Index j = 0; j < flow.curves.cols(); ++j) {
    const std::string path = (std::filesystem::path(dir) / (prefix + "_curve_" + std::to_string(j) + ".csv")).string();
    std::ofstream f(path);
    if (!f) throw ConfigError("output.dir: cannot write '" + path + "'");
    write_curve_csv(f, flow, j);
    paths.push_back(path);
  }
  return paths;
}

namespace {

nlohmann::ordered_json vec(const Eigen::VectorXd& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

nlohmann::ordered_json to_json(const CrossingReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tau"] = r.tau;
  j["lambda_inf"] = r.lambda_inf;
  auto cs = nlohmann::ordered_json::array();
  for (const auto& e : r.crossings) {
    nlohmann::ordered_json c;
    c["t_star"] = e.t;
    c["t_refined"] = e.t_refined;
    c["refined"] = e.refined;
    c["dim_C"] = e.dim_complex;
    c["dim_R"] = e.dim_real;
    c["signature"] = e.signature;
    c["form_volume"] = vec(e.form_volume);
    c["form_boundary"] = vec(e.form_boundary);
    c["formula_gap"] = e.formula_gap;
    c["slopes"] = vec(e.slopes);
    c["regular"] = e.regular;
    c["slopes_agree"] = e.slopes_agree;
    c["at_tau"] = e.at_tau;
    c["at_one"] = e.at_one;
    cs.push_back(std::move(c));
  }
  j["crossings"] = std::move(cs);
  j["totals"] = {{"morse_tau", r.morse_tau},
                 {"morse_one", r.morse_one},
                 {"morse_real_tau", r.morse_real_tau},
                 {"morse_real_one", r.morse_real_one},
                 {"morse_origin", r.morse_origin},
                 {"maslov", r.maslov}};
  return j;
}

nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["identity"] = r.identity;
  j["pass"] = r.pass;
  auto cs = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json o;
    o["name"] = c.name;
    o["lhs"] = c.lhs;
    o["rhs"] = c.rhs;
    o["pass"] = c.pass;
    if (!c.note.empty()) o["note"] = c.note;
    cs.push_back(std::move(o));
  }
  j["checks"] = std::move(cs);
  if (!r.ledger.empty()) {
    nlohmann::ordered_json l;
    for (const auto& [k, v] : r.ledger) l[k] = v;
    j["ledger"] = std::move(l);
  }
  j["scan"] = to_json(r.scan);
  return j;
}

}  // namespace maslov
