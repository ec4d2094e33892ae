#include "coulomb_ot/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coulomb_ot {

using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number(v[k]));
  return a;
}

json mat(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    a.push_back(row);
  }
  return a;
}

double as_double(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json radius_json(const RadiusRecord& r) {
  return {
      {"R", number(r.R)},
      {"E_plus", number(r.energy_plus)},
      {"E_two_sided", number(r.energy_two_sided)},
      {"D", number(r.data)},
      {"K_R", number(r.K_R)},
      {"delta_R", number(r.delta_R)},
      {"near_optimal", r.near_optimal},
      {"E_two_sided_2R", number(r.energy_two_sided_2R)},
      {"E_plus_6R", number(r.energy_plus_6R)},
      {"D_6R", number(r.data_6R)},
      {"cross_inequality_ok", r.cross_inequality_ok},
      {"c0_norm_sq", number(r.c0_norm_sq)},
      {"c0_bound", number(r.c0_bound)},
      {"c0_bound_ok", r.c0_bound_ok},
      {"qualitative", {{"ok", r.qualitative.ok}, {"Lambda_min", number(r.qualitative.lambda_min)}}},
      {"quantitative",
       {{"ok", r.quantitative.ok},
        {"M_min", number(r.quantitative.M_min)},
        {"smallness", number(r.quantitative.smallness)},
        {"hessian_deviation", number(r.quantitative.hessian_deviation)},
        {"hypotheses_ok", r.quantitative.hypotheses_ok},
        {"inverse_inclusion_ok", r.quantitative.inverse_inclusion_ok}}},
      {"gradient", {{"ok", r.gradient.ok}, {"lambda_min", number(r.gradient.lambda_min)}}},
      {"cone_found", r.cone_found},
  };
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string measure_to_json(const DiscreteMeasure& m) {
  json j;
  j["dim"] = m.dim();
  json pts = json::array();
  for (int i = 0; i < m.size(); ++i) pts.push_back(vec(m.point(i)));
  j["points"] = pts;
  j["weights"] = vec(m.weights());
  j["cell_volume"] = vec(m.cell_volume());
  if (m.grid()) {
    j["grid"] = {{"shape", m.grid()->shape}, {"lower", vec(m.grid()->lower)}, {"spacing", vec(m.grid()->spacing)}};
  }
  return j.dump();
}

DiscreteMeasure measure_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    const int d = j.at("dim").get<int>();
    const auto& pts = j.at("points");
    const auto n = static_cast<int>(pts.size());
    Matrix points(d, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(pts[i].size()) != d) throw std::invalid_argument("point dimension mismatch");
      for (int a = 0; a < d; ++a) points(a, i) = pts[i][a].get<double>();
    }
    Vector w(n), vol(n);
    const auto& jw = j.at("weights");
    if (static_cast<int>(jw.size()) != n) throw std::invalid_argument("weights do not match points");
    for (int i = 0; i < n; ++i) w[i] = jw[i].get<double>();
    if (j.contains("cell_volume")) {
      const auto& jv = j["cell_volume"];
      if (static_cast<int>(jv.size()) != n) throw std::invalid_argument("cell volumes do not match points");
      for (int i = 0; i < n; ++i) vol[i] = jv[i].get<double>();
    } else {
      vol.setOnes();
    }
    std::optional<GridInfo> grid;
    if (j.contains("grid")) {
      GridInfo g;
      g.shape = j["grid"].at("shape").get<std::vector<int>>();
      const auto lo = j["grid"].at("lower").get<std::vector<double>>();
      const auto sp = j["grid"].at("spacing").get<std::vector<double>>();
      g.lower = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
      g.spacing = Eigen::Map<const Vector>(sp.data(), static_cast<Eigen::Index>(sp.size()));
      grid = g;
    }
    return DiscreteMeasure(std::move(points), std::move(w), std::move(vol), std::move(grid));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed measure JSON: ") + e.what());
  }
}

DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return measure_from_json(ss.str());
}

void write_plan_csv(std::ostream& out, const Plan& plan) {
  out << "i,j,mass\n";
  for (const auto& e : plan.entries) out << e.i << ',' << e.j << ',' << format_double(e.mass) << '\n';
}

std::string report_to_json(const SolveReport& r) {
  json j = {
      {"primal_cost", number(r.primal_cost)},
      {"dual_cost", number(r.dual_cost)},
      {"dual_gap", number(r.dual_gap)},
      {"iterations", r.iterations},
      {"method", to_string(r.method)},
      {"marginal_error", number(r.marginal_error)},
      {"symmetrized", r.symmetrized},
  };
  if (r.method == SolveMethod::kEntropic) j["eta"] = r.eta;
  return j.dump(2);
}

std::string potentials_to_json(const PotentialPair& p) {
  json j = {{"psi", vec(p.psi)}, {"phi", vec(p.phi)}, {"K", number(p.K)}, {"base", {p.base.first, p.base.second}}};
  return j.dump();
}

std::string diagnostics_to_json(const DiagnosticsReport& rep) {
  json pts = json::array();
  for (const auto& p : rep.points) {
    const auto& n = p.normalization;
    json radii = json::array();
    for (const auto& r : p.radii) radii.push_back(radius_json(r));
    pts.push_back({
        {"index", p.source_index},
        {"target", p.target_index},
        {"x0", vec(p.x0)},
        {"y0", vec(p.y0)},
        {"A", mat(n.A)},
        {"M", mat(n.M)},
        {"max_eigenvalue", number(n.max_eigenvalue)},
        {"hessian_change", number(n.hessian_change)},
        {"base_error", number(n.base_error)},
        {"mass_scale", number(n.mass_scale)},
        {"accepted", n.accepted},
        {"reason", n.reason},
        {"monge_ampere_residual", number(p.monge_ampere)},
        {"checks_ok", p.checks_ok},
        {"radii", radii},
    });
  }
  auto flags = [](const std::vector<SingularFlag>& v) {
    json a = json::array();
    for (const auto& f : v) a.push_back({{"index", f.index}, {"reason", f.reason}});
    return a;
  };
  json j = {
      {"schema_version", rep.schema_version},
      {"support_gap", number(rep.support_gap)},
      {"r0", number(rep.r0)},
      {"delta", number(rep.delta)},
      {"K", number(rep.K)},
      {"support_gap_ok", rep.support_gap_ok},
      {"points", pts},
      {"singular", flags(rep.singular)},
      {"check_failures", flags(rep.check_failures)},
  };
  return j.dump(2);
}

std::string oracle_to_json(const RadialOracle& o) {
  json plan = json::array();
  for (const auto& e : o.plan) plan.push_back({e.i, e.j, number(e.mass)});
  json j = {
      {"radii", o.radii},
      {"masses", o.masses},
      {"image_radius", vec(o.image_radius)},
      {"r_star", number(o.r_star)},
      {"cost", number(o.cost)},
      {"pairing", o.pairing == RadialPairing::kSameRay ? "same-ray" : "antipodal"},
      {"plan", plan},
  };
  return j.dump(2);
}

void write_singular_csv(std::ostream& out, const DiagnosticsReport& rep, const DiscreteMeasure& sources) {
  out << "index";
  for (int a = 0; a < sources.dim(); ++a) out << ",x" << a;
  out << ",flag_reason\n";
  for (const auto& f : rep.singular) {
    out << f.index;
    for (int a = 0; a < sources.dim(); ++a) out << ',' << format_double(sources.point(f.index)[a]);
    out << ',' << f.reason << '\n';
  }
}

void write_energies_csv(std::ostream& out, const DiagnosticsReport& rep) {
  out << "index,R,E_plus,E,D,K_R\n";
  for (const auto& p : rep.points) {
    for (const auto& r : p.radii) {
      out << p.source_index << ',' << format_double(r.R) << ',' << format_double(r.energy_plus) << ','
          << format_double(r.energy_two_sided) << ',' << format_double(r.data) << ',' << format_double(r.K_R)
          << '\n';
    }
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace coulomb_ot
