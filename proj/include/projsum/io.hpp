#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "projsum/hash.hpp"
#include "projsum/isotropic.hpp"
#include "projsum/plan.hpp"
#include "projsum/projdecomp.hpp"

namespace projsum {

using Json = nlohmann::ordered_json;

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) raise(Errc::ParseError, "invalid JSON in " + path);
  return j;
}

inline void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) raise(Errc::ParseError, "cannot open " + path + " for writing");
  out << text;
}

inline void save_json_file(const std::string& path, const Json& j) {
  save_text_file(path, j.dump(2) + "\n");
}

// ---- canonical serialization and hashing ----

// Row-major, 17 significant digits; feeds the certificate target hash.
inline std::string canonical_matrix_string(const Matrix& m) {
  std::string out = "n=" + std::to_string(m.rows()) + ";";
  char buf[96];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      const cplx v = m(i, j);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g;", v.real(), v.imag());
      out += buf;
    }
  }
  return out;
}

inline std::string matrix_hash(const Matrix& m) {
  return sha256_hex(canonical_matrix_string(m));
}

// ---- matrix files ----

inline Json matrix_to_json(const Matrix& m) {
  bool complex_entries = false;
  for (int i = 0; i < m.rows() && !complex_entries; ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j).imag() != 0.0) {
        complex_entries = true;
        break;
      }
  Json j;
  j["n"] = m.rows();
  j["complex"] = complex_entries;
  Json entries = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    for (int k = 0; k < m.cols(); ++k) {
      if (complex_entries)
        entries.push_back(Json::array({m(i, k).real(), m(i, k).imag()}));
      else
        entries.push_back(m(i, k).real());
    }
  }
  j["entries"] = std::move(entries);
  return j;
}

inline cplx entry_from_json(const Json& e) {
  if (e.is_number()) return cplx(e.get<double>(), 0.0);
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return cplx(e[0].get<double>(), e[1].get<double>());
  raise(Errc::ParseError, "matrix entry must be a number or an [re, im] pair");
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("entries"))
    raise(Errc::ParseError, "matrix object needs fields 'n' and 'entries'");
  if (!j["n"].is_number_integer() || j["n"].get<int>() < 0)
    raise(Errc::ParseError, "matrix field 'n' must be a nonnegative integer");
  const int n = j["n"].get<int>();
  const Json& entries = j["entries"];
  if (!entries.is_array() || entries.size() != static_cast<size_t>(n) * n)
    raise(Errc::ParseError, "matrix needs exactly n*n row-major entries");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = entry_from_json(entries[i * n + k]);
  return m;
}

inline HermitianMatrix hermitian_from_json(const Json& j) {
  return HermitianMatrix(matrix_from_json(j));
}

// ---- resolution files ----

inline Json resolution_to_json(const IsotropicResolution& res) {
  Json j;
  j["n"] = res.target.n();
  Json vectors = Json::array();
  for (const UnitVector& v : res.basis) {
    Json vec = Json::array();
    for (const cplx& c : v.components) vec.push_back(Json::array({c.real(), c.imag()}));
    vectors.push_back(std::move(vec));
  }
  j["vectors"] = std::move(vectors);
  return j;
}

inline std::vector<std::vector<cplx>> vectors_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("vectors") || !j["vectors"].is_array())
    raise(Errc::ParseError, "resolution object needs a 'vectors' list");
  std::vector<std::vector<cplx>> out;
  for (const Json& vec : j["vectors"]) {
    if (!vec.is_array()) raise(Errc::ParseError, "each vector must be a list");
    std::vector<cplx> v;
    for (const Json& e : vec) v.push_back(entry_from_json(e));
    out.push_back(std::move(v));
  }
  return out;
}

// ---- measure files ----

inline Json measure_to_json(const SpectralMeasure& mu) {
  Json j;
  j["ambient"] = ambient_name(mu.ambient());
  Json atoms = Json::array();
  for (const Atom& a : mu.atoms()) {
    Json atom;
    atom["value"] = rat_to_string(a.value);
    atom["mass"] = rat_to_string(a.mass);
    atoms.push_back(std::move(atom));
  }
  j["atoms"] = std::move(atoms);
  Json diffuse = Json::array();
  for (const Band& b : mu.diffuse()) {
    Json band;
    band["interval"] = Json::array({rat_to_string(b.lo), rat_to_string(b.hi)});
    band["density"] = rat_to_string(b.density);
    diffuse.push_back(std::move(band));
  }
  j["diffuse"] = std::move(diffuse);
  j["background_one"] = extrat_to_string(mu.background_one());
  return j;
}

inline Rat rational_field(const Json& j, const char* what) {
  if (!j.is_string()) raise(Errc::ParseError, std::string(what) + " must be a rational string");
  return parse_rational(j.get<std::string>());
}

inline SpectralMeasure measure_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("ambient"))
    raise(Errc::ParseError, "measure object needs an 'ambient' field");
  const std::string amb = j["ambient"].is_string() ? j["ambient"].get<std::string>() : "";
  Ambient ambient;
  if (amb == "II1") ambient = Ambient::II1;
  else if (amb == "IIinf") ambient = Ambient::IIinf;
  else raise(Errc::ParseError, "ambient must be 'II1' or 'IIinf'");

  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    if (!j["atoms"].is_array()) raise(Errc::ParseError, "'atoms' must be a list");
    for (const Json& a : j["atoms"]) {
      if (!a.is_object() || !a.contains("value") || !a.contains("mass"))
        raise(Errc::ParseError, "atom needs 'value' and 'mass'");
      atoms.push_back({rational_field(a["value"], "atom value"),
                       rational_field(a["mass"], "atom mass")});
    }
  }
  std::vector<Band> bands;
  if (j.contains("diffuse")) {
    if (!j["diffuse"].is_array()) raise(Errc::ParseError, "'diffuse' must be a list");
    for (const Json& b : j["diffuse"]) {
      if (!b.is_object() || !b.contains("interval") || !b.contains("density") ||
          !b["interval"].is_array() || b["interval"].size() != 2)
        raise(Errc::ParseError, "band needs 'interval' [lo, hi] and 'density'");
      bands.push_back({rational_field(b["interval"][0], "band lo"),
                       rational_field(b["interval"][1], "band hi"),
                       rational_field(b["density"], "band density")});
    }
  }
  ExtRat bg = ExtRat::finite(0);
  if (j.contains("background_one")) {
    const Json& b = j["background_one"];
    if (!b.is_string()) raise(Errc::ParseError, "'background_one' must be a string");
    const std::string s = b.get<std::string>();
    bg = s == "INF" ? ExtRat::inf() : ExtRat::finite(parse_rational(s));
  }
  return SpectralMeasure(ambient, std::move(atoms), std::move(bands), bg);
}

// ---- plan files ----

inline Json plan_node_to_json(const PlanNode& node) {
  Json j;
  j["kind"] = node_kind_name(node.kind);
  Json masses;
  masses["measure"] = measure_to_json(node.measure);
  switch (node.kind) {
    case NodeKind::HalvingBlock:
      masses["index"] = node.index;
      masses["excess"] = rat_to_string(node.excess);
      masses["defect"] = rat_to_string(node.defect);
      break;
    case NodeKind::GeometricBlock:
      masses["index"] = node.index;
      masses["excess"] = rat_to_string(node.excess);
      break;
    case NodeKind::SurplusCut:
      masses["excess"] = rat_to_string(node.excess);
      break;
    case NodeKind::Tail:
      masses["depth"] = node.depth;
      masses["excess"] = rat_to_string(node.excess);
      masses["defect"] = rat_to_string(node.defect);
      break;
    case NodeKind::II1Leaf:
      masses["unit_trace"] = node.unit_trace;
      break;
    default:
      break;
  }
  j["masses"] = std::move(masses);
  Json children = Json::array();
  for (const PlanNode& c : node.children) children.push_back(plan_node_to_json(c));
  j["children"] = std::move(children);
  if (node.kind == NodeKind::CitedLeaf) {
    j["citation"] = node.citation;
    j["payload"] = node.payload;
  }
  return j;
}

inline Json plan_to_json(const PlanTree& plan) {
  Json j;
  j["root"] = measure_to_json(plan.root);
  j["planner"] = plan.planner;
  j["scale"] = rat_to_string(plan.scale);
  j["scale_mode"] = plan.scale_mode;
  Json children = Json::array();
  for (const PlanNode& c : plan.children) children.push_back(plan_node_to_json(c));
  j["children"] = std::move(children);
  return j;
}

inline PlanNode plan_node_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    raise(Errc::ParseError, "plan node needs a 'kind' string");
  PlanNode node;
  node.kind = node_kind_from_name(j["kind"].get<std::string>());
  if (j.contains("masses") && j["masses"].is_object()) {
    const Json& m = j["masses"];
    if (m.contains("measure")) node.measure = measure_from_json(m["measure"]);
    if (m.contains("index")) node.index = m["index"].get<int>();
    if (m.contains("depth")) node.depth = m["depth"].get<int>();
    if (m.contains("unit_trace")) node.unit_trace = m["unit_trace"].get<bool>();
    if (m.contains("excess")) node.excess = rational_field(m["excess"], "excess");
    if (m.contains("defect")) node.defect = rational_field(m["defect"], "defect");
  }
  if (j.contains("citation") && j["citation"].is_string())
    node.citation = j["citation"].get<std::string>();
  if (j.contains("payload") && j["payload"].is_string())
    node.payload = j["payload"].get<std::string>();
  if (j.contains("children")) {
    if (!j["children"].is_array()) raise(Errc::ParseError, "'children' must be a list");
    for (const Json& c : j["children"]) node.children.push_back(plan_node_from_json(c));
  }
  return node;
}

inline PlanTree plan_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("root") || !j.contains("planner"))
    raise(Errc::ParseError, "plan object needs 'root' and 'planner'");
  PlanTree plan;
  plan.root = measure_from_json(j["root"]);
  if (!j["planner"].is_string()) raise(Errc::ParseError, "'planner' must be a string");
  plan.planner = j["planner"].get<std::string>();
  if (j.contains("scale")) plan.scale = rational_field(j["scale"], "scale");
  if (j.contains("scale_mode") && j["scale_mode"].is_string())
    plan.scale_mode = j["scale_mode"].get<std::string>();
  if (j.contains("children")) {
    if (!j["children"].is_array()) raise(Errc::ParseError, "'children' must be a list");
    for (const Json& c : j["children"]) plan.children.push_back(plan_node_from_json(c));
  }
  return plan;
}

// ---- certificate files ----

inline Json certificate_to_json(const SumCertificate& cert,
                                const std::vector<Matrix>& projections) {
  Json j;
  j["target_hash"] = cert.target_hash;
  Json ps = Json::array();
  for (const Matrix& p : projections) ps.push_back(matrix_to_json(p));
  j["projections"] = std::move(ps);
  Json residuals;
  residuals["sum"] = cert.sum_residual;
  residuals["idem_max"] = cert.idem_max;
  residuals["herm_max"] = cert.herm_max;
  j["residuals"] = std::move(residuals);
  j["count"] = cert.count;
  j["mode"] = cert.mode;
  return j;
}

struct DiskCertificate {
  std::string target_hash;
  std::vector<Matrix> projections;
  double sum_residual = 0.0;
  double idem_max = 0.0;
  double herm_max = 0.0;
  int count = 0;
  std::string mode;
};

inline DiskCertificate certificate_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("target_hash") || !j.contains("projections"))
    raise(Errc::ParseError, "certificate needs 'target_hash' and 'projections'");
  DiskCertificate cert;
  if (!j["target_hash"].is_string()) raise(Errc::ParseError, "'target_hash' must be a string");
  cert.target_hash = j["target_hash"].get<std::string>();
  if (!j["projections"].is_array()) raise(Errc::ParseError, "'projections' must be a list");
  for (const Json& p : j["projections"]) cert.projections.push_back(matrix_from_json(p));
  if (j.contains("residuals") && j["residuals"].is_object()) {
    const Json& r = j["residuals"];
    if (r.contains("sum")) cert.sum_residual = r["sum"].get<double>();
    if (r.contains("idem_max")) cert.idem_max = r["idem_max"].get<double>();
    if (r.contains("herm_max")) cert.herm_max = r["herm_max"].get<double>();
  }
  if (j.contains("count")) cert.count = j["count"].get<int>();
  if (j.contains("mode") && j["mode"].is_string()) cert.mode = j["mode"].get<std::string>();
  return cert;
}

}  // namespace projsum
