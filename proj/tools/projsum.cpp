#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "projsum/generate.hpp"
#include "projsum/io.hpp"
#include "projsum/realize.hpp"

namespace {

using namespace projsum;

struct ReportItem {
  std::string name;
  std::string status;  // pass | fail | skip
  std::string detail;
};

struct Report {
  std::string command;
  std::vector<ReportItem> items;
  Json metadata = Json::object();
  double elapsed_ms = 0.0;

  void add(const std::string& name, bool ok, const std::string& detail) {
    items.push_back({name, ok ? "pass" : "fail", detail});
  }
  void skip(const std::string& name, const std::string& detail) {
    items.push_back({name, "skip", detail});
  }
  bool all_pass() const {
    for (const auto& i : items)
      if (i.status == "fail") return false;
    return true;
  }
};

// Machine rendering omits timing so identical runs are byte-identical.
void emit(const Report& report, bool as_json) {
  if (as_json) {
    Json j;
    j["command"] = report.command;
    Json items = Json::array();
    for (const auto& i : report.items) {
      Json item;
      item["name"] = i.name;
      item["status"] = i.status;
      item["detail"] = i.detail;
      items.push_back(std::move(item));
    }
    j["items"] = std::move(items);
    if (!report.metadata.empty()) j["metadata"] = report.metadata;
    j["pass"] = report.all_pass();
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "projsum " << report.command << "\n";
  for (const auto& i : report.items) {
    std::string tag = i.status == "pass" ? "PASS" : i.status == "fail" ? "FAIL" : "SKIP";
    std::cout << "  [" << tag << "] " << i.name;
    if (!i.detail.empty()) std::cout << ": " << i.detail;
    std::cout << "\n";
  }
  for (auto it = report.metadata.begin(); it != report.metadata.end(); ++it)
    std::cout << "  " << it.key() << " = " << it.value().dump() << "\n";
  std::cout << (report.all_pass() ? "ok" : "FAILED") << " (" << report.elapsed_ms << " ms)\n";
}

struct Options {
  std::string in_path;
  std::string out_path;
  std::string target_path;
  std::string kind;
  int n = 6;
  double tol = 1e-8;
  double eps_one = tolerance::kEpsOneDefault;
  int depth = 10;
  int dyadic_k = 4;
  uint64_t seed = 1;
  bool as_json = false;
};

char fmt_buf[64];

std::string fmt(double v) {
  std::snprintf(fmt_buf, sizeof(fmt_buf), "%.3g", v);
  return fmt_buf;
}

bool has_identity_background(const Json& j) {
  return j.is_object() && j.contains("identity_background") &&
         j["identity_background"].is_boolean() && j["identity_background"].get<bool>();
}

// ---- decompose ----

int cmd_decompose(const Options& opt, Report& report) {
  const Json j = load_json_file(opt.in_path);
  const Matrix raw = matrix_from_json(j);
  const HermitianMatrix a(raw);

  ProjectionList plist;
  if (has_identity_background(j)) {
    IdentityBackgroundOperator op{a};
    plist = decompose_identity_background(op, opt.eps_one);
  } else {
    plist = decompose_fillmore(a);
  }
  SumCertificate cert = verify_sum(a, plist, opt.tol);
  cert.target_hash = matrix_hash(raw);

  report.add("decomposition", cert.pass,
             std::to_string(cert.count) + " projections, sum residual " +
                 fmt(cert.sum_residual) + ", idem " + fmt(cert.idem_max) + ", herm " +
                 fmt(cert.herm_max));
  report.metadata["mode"] = cert.mode;
  report.metadata["count"] = cert.count;
  report.metadata["target_hash"] = cert.target_hash;

  if (!opt.out_path.empty()) {
    std::vector<Matrix> ps;
    for (const auto& p : plist.projections) ps.push_back(p.matrix.mat());
    save_json_file(opt.out_path, certificate_to_json(cert, ps));
  }
  return cert.pass ? 0 : 1;
}

// ---- check ----

int cmd_check(const Options& opt, Report& report) {
  const Json j = load_json_file(opt.in_path);
  ConditionReport cr;
  if (j.is_object() && j.contains("ambient")) {
    cr = check_measure(measure_from_json(j));
  } else {
    const HermitianMatrix a(matrix_from_json(j));
    const CheckMode mode = has_identity_background(j) ? CheckMode::MatrixIdentityBackground
                                                      : CheckMode::MatrixFinite;
    cr = check_decomposable(a, mode, opt.eps_one);
  }
  const std::string reason =
      cr.decomposable ? "decomposable" : std::string(condition_reason_name(cr.reason));
  report.add("condition", cr.decomposable,
             reason + " (mode " + check_mode_name(cr.mode) + ", witness " + fmt(cr.witness) +
                 (cr.detail.empty() ? "" : ", " + cr.detail) + ")");
  report.metadata["mode"] = check_mode_name(cr.mode);
  report.metadata["reason"] = condition_reason_name(cr.reason);
  if (!opt.out_path.empty()) {
    Json out;
    out["mode"] = check_mode_name(cr.mode);
    out["decomposable"] = cr.decomposable;
    out["reason"] = condition_reason_name(cr.reason);
    out["witness"] = cr.witness;
    out["detail"] = cr.detail;
    save_json_file(opt.out_path, out);
  }
  return cr.decomposable ? 0 : 3;
}

// ---- zero-diag ----

int cmd_zero_diag(const Options& opt, Report& report) {
  const HermitianMatrix x(matrix_from_json(load_json_file(opt.in_path)));
  const IsotropicResolution res = zero_diagonal_resolution(x, tolerance::kIntegerTrace);

  double max_form = 0.0;
  Matrix sum(x.n(), x.n());
  for (const auto& e : res.projections) sum = sum + e.matrix.mat();
  for (const auto& v : res.basis)
    max_form = std::max(max_form, std::abs(quadratic_form(x, v.components)));
  const double completeness = (sum - Matrix::identity(x.n())).frobenius_norm();
  const double form_tol = 1e-9 * std::max(1.0, x.frobenius_norm());
  const bool ok = max_form <= form_tol && completeness <= opt.tol;
  report.add("zero-diagonal resolution", ok,
             std::to_string(res.projections.size()) + " vectors, max form " + fmt(max_form) +
                 ", completeness " + fmt(completeness));
  if (!opt.out_path.empty()) save_json_file(opt.out_path, resolution_to_json(res));
  return ok ? 0 : 1;
}

// ---- plan ----

int cmd_plan(const Options& opt, Report& report) {
  const SpectralMeasure mu = measure_from_json(load_json_file(opt.in_path));
  PlanTree plan;
  if (mu.ambient() == Ambient::II1) {
    plan = ii1_plan(mu);
  } else {
    const TraceFunctionals tf = functional_traces(mu);
    if (tf.tau_plus == tf.tau_minus) {
      plan = halving_plan(mu, opt.depth);
    } else if (tf.tau_minus.value < tf.tau_plus.value) {
      plan = surplus_plan(mu, opt.depth);
    } else {
      const ConditionReport cr = check_measure(mu);
      throw ConditionError(cr, "defect exceeds excess: " + cr.detail);
    }
  }
  const PlanCertificate cert = verify_plan(plan);
  for (const auto& c : cert.checks) report.add(c.node, c.ok, c.detail);
  report.metadata["planner"] = plan.planner;
  report.metadata["nodes"] = static_cast<int>(plan.children.size());
  if (!plan.scale_mode.empty()) {
    report.metadata["scale"] = rat_to_string(plan.scale);
    report.metadata["scale_mode"] = plan.scale_mode;
  }
  if (!opt.out_path.empty()) save_json_file(opt.out_path, plan_to_json(plan));
  return cert.pass ? 0 : 1;
}

// ---- realize ----

int cmd_realize(const Options& opt, Report& report) {
  const PlanTree plan = plan_from_json(load_json_file(opt.in_path));
  const RealizationReport rr = realize_plan(plan, opt.dyadic_k);
  Json out_leaves = Json::array();
  for (const auto& leaf : rr.leaves) {
    Json item;
    item["leaf"] = leaf.node;
    if (!leaf.materialized) {
      report.skip(leaf.node, leaf.constraint);
      item["status"] = "skip";
      item["constraint"] = leaf.constraint;
    } else {
      report.add(leaf.node, leaf.certificate.pass,
                 std::to_string(leaf.matrix.n()) + " dims, " +
                     std::to_string(leaf.certificate.count) + " projections, sum residual " +
                     fmt(leaf.certificate.sum_residual));
      item["status"] = leaf.certificate.pass ? "pass" : "fail";
      SumCertificate cert = leaf.certificate;
      cert.target_hash = matrix_hash(leaf.matrix.mat());
      std::vector<Matrix> ps;
      for (const auto& p : leaf.projections.projections) ps.push_back(p.matrix.mat());
      item["certificate"] = certificate_to_json(cert, ps);
    }
    out_leaves.push_back(std::move(item));
  }
  report.metadata["resolution"] = opt.dyadic_k;
  report.metadata["materialized"] = rr.materialized_count();
  if (!opt.out_path.empty()) {
    Json out;
    out["resolution"] = opt.dyadic_k;
    out["leaves"] = std::move(out_leaves);
    save_json_file(opt.out_path, out);
  }
  return rr.all_materialized_pass() ? 0 : 1;
}

// ---- verify ----

int cmd_verify(const Options& opt, Report& report) {
  const Json j = load_json_file(opt.in_path);
  if (j.is_object() && j.contains("planner")) {
    const PlanTree plan = plan_from_json(j);
    const PlanCertificate cert = verify_plan(plan);
    for (const auto& c : cert.checks) report.add(c.node, c.ok, c.detail);
    return cert.pass ? 0 : 1;
  }
  if (j.is_object() && j.contains("target_hash")) {
    const DiskCertificate disk = certificate_from_json(j);
    double idem_max = 0.0;
    double herm_max = 0.0;
    for (const Matrix& p : disk.projections) {
      idem_max = std::max(idem_max, (p * p - p).frobenius_norm());
      herm_max = std::max(herm_max, (p - p.adjoint()).frobenius_norm());
    }
    report.add("projections", idem_max <= opt.tol && herm_max <= opt.tol,
               "idem " + fmt(idem_max) + ", herm " + fmt(herm_max) + " over " +
                   std::to_string(disk.projections.size()) + " matrices");
    bool ok = idem_max <= opt.tol && herm_max <= opt.tol;
    if (!opt.target_path.empty()) {
      const Matrix target = matrix_from_json(load_json_file(opt.target_path));
      const bool hash_ok = matrix_hash(target) == disk.target_hash;
      report.add("target hash", hash_ok, disk.target_hash);
      const SumCertificate re = verify_sum_raw(target, disk.projections, opt.tol,
                                               disk.mode.empty() ? "matrix-finite" : disk.mode);
      report.add("sum", re.sum_residual <= opt.tol * std::max(1.0, target.frobenius_norm()),
                 "residual " + fmt(re.sum_residual));
      ok = ok && hash_ok && re.pass;
    }
    return ok ? 0 : 1;
  }
  raise(Errc::ParseError, "verify expects a plan or certificate file");
}

// ---- gen ----

int cmd_gen(const Options& opt, Report& report) {
  if (opt.out_path.empty()) raise(Errc::ParseError, "gen requires --out");
  Json out;
  std::string postcondition;
  bool ok = true;
  if (opt.kind == "fillmore-matrix") {
    if (opt.n > 64) raise(Errc::ParseError, "matrix kinds require n <= 64");
    const HermitianMatrix a = gen_fillmore_matrix(opt.n, opt.seed);
    ok = check_decomposable(a, CheckMode::MatrixFinite, opt.eps_one).decomposable;
    postcondition = "integer trace at least rank";
    out = matrix_to_json(a.mat());
  } else if (opt.kind == "traceless") {
    if (opt.n > 64) raise(Errc::ParseError, "matrix kinds require n <= 64");
    const HermitianMatrix x = gen_traceless(opt.n, opt.seed);
    ok = std::abs(x.trace()) <= 1e-12;
    postcondition = "trace below 1e-12";
    out = matrix_to_json(x.mat());
  } else if (opt.kind == "balanced-measure") {
    const SpectralMeasure mu = gen_balanced_measure(opt.seed);
    const TraceFunctionals tf = functional_traces(mu);
    ok = tf.tau_plus == tf.tau_minus;
    postcondition = "excess equals defect exactly";
    out = measure_to_json(mu);
  } else if (opt.kind == "surplus-measure") {
    const SpectralMeasure mu = gen_surplus_measure(opt.seed);
    const TraceFunctionals tf = functional_traces(mu);
    ok = tf.tau_minus.value < tf.tau_plus.value;
    postcondition = "defect strictly below excess";
    out = measure_to_json(mu);
  } else if (opt.kind == "ii1-dyadic") {
    const SpectralMeasure mu = gen_ii1_dyadic(opt.dyadic_k, opt.seed);
    ok = exactly_realizable(mu) && check_measure(mu).decomposable;
    postcondition = "dyadic masses, excess at least defect";
    out = measure_to_json(mu);
  } else {
    raise(Errc::ParseError,
          "unknown kind '" + opt.kind +
              "' (expected fillmore-matrix, traceless, balanced-measure, surplus-measure, "
              "ii1-dyadic)");
  }
  save_json_file(opt.out_path, out);
  report.add("instance", ok, opt.kind + " to " + opt.out_path + " (" + postcondition + ")");
  report.metadata["prng"] = SeededRng::name();
  report.metadata["kind"] = opt.kind;
  report.metadata["seed"] = opt.seed;
  return ok ? 0 : 1;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::ParseError: return 2;
    case Errc::NumericalFailure: return 4;
    default: return 3;  // condition and precondition failures
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sums of projections: decompositions, plans, and certificates"};
  app.require_subcommand(1);

  Options opt;
  if (const char* env = std::getenv("PROJSUM_TOL")) {
    try {
      opt.tol = std::stod(env);
    } catch (...) {
      std::cerr << "ParseError: PROJSUM_TOL is not a number\n";
      return 2;
    }
  }

  const auto add_common = [&](CLI::App* cmd, bool needs_in) {
    auto* in = cmd->add_option("--in", opt.in_path, "input file");
    if (needs_in) in->required();
    cmd->add_option("--out", opt.out_path, "output file");
    cmd->add_option("--tol", opt.tol, "verification tolerance");
    cmd->add_option("--eps-one", opt.eps_one, "unit-eigenvalue snap width");
    cmd->add_option("--depth", opt.depth, "plan truncation depth")->check(CLI::PositiveNumber);
    cmd->add_option("--dyadic-k", opt.dyadic_k, "dyadic resolution exponent")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "generator seed");
    cmd->add_flag("--json{true},--text{false}", opt.as_json, "report format");
  };

  auto* decompose = app.add_subcommand("decompose", "decompose a matrix into projections");
  add_common(decompose, true);
  auto* check = app.add_subcommand("check", "test the decomposability condition");
  add_common(check, true);
  auto* zero_diag = app.add_subcommand("zero-diag", "zero-diagonal resolution of a traceless matrix");
  add_common(zero_diag, true);
  auto* plan = app.add_subcommand("plan", "build and verify a decomposition plan for a measure");
  add_common(plan, true);
  auto* realize = app.add_subcommand("realize", "materialize plan leaves as matrices");
  add_common(realize, true);
  auto* verify = app.add_subcommand("verify", "re-check a certificate or plan file");
  add_common(verify, true);
  verify->add_option("--target", opt.target_path, "matrix file the certificate refers to");
  auto* gen = app.add_subcommand("gen", "generate a seeded instance");
  add_common(gen, false);
  gen->add_option("--kind", opt.kind, "instance kind")->required();
  gen->add_option("--n", opt.n, "matrix dimension")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (opt.tol <= 0) {
    std::cerr << "ParseError: tol must be positive\n";
    return 2;
  }

  Report report;
  const auto started = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    if (decompose->parsed()) {
      report.command = "decompose";
      rc = cmd_decompose(opt, report);
    } else if (check->parsed()) {
      report.command = "check";
      rc = cmd_check(opt, report);
    } else if (zero_diag->parsed()) {
      report.command = "zero-diag";
      rc = cmd_zero_diag(opt, report);
    } else if (plan->parsed()) {
      report.command = "plan";
      rc = cmd_plan(opt, report);
    } else if (realize->parsed()) {
      report.command = "realize";
      rc = cmd_realize(opt, report);
    } else if (verify->parsed()) {
      report.command = "verify";
      rc = cmd_verify(opt, report);
    } else if (gen->parsed()) {
      report.command = "gen";
      rc = cmd_gen(opt, report);
    }
  } catch (const ConditionError& e) {
    report.add("condition", false, e.what());
    emit(report, opt.as_json);
    return 3;
  } catch (const Error& e) {
    report.add("error", false, e.what());
    emit(report, opt.as_json);
    return exit_code_for(e);
  }
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  emit(report, opt.as_json);
  return rc;
}
