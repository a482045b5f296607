// Acceptance suite: one line per criterion, exit code = number of failures.
// Each criterion exercises the library at desk scale with fixed seeds so the
// run is reproducible byte for byte.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "projsum/generate.hpp"
#include "projsum/io.hpp"
#include "projsum/realize.hpp"

using namespace projsum;

namespace {

int failures = 0;

void report(int index, const char* label, bool ok, const std::string& detail = "") {
  std::printf("criterion %2d: %s  %s%s%s\n", index, ok ? "PASS" : "FAIL", label,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

bool rank_one(const Projection& p) {
  return p.rank == 1 && std::abs(p.matrix.trace() - 1.0) <= 1e-8;
}

HermitianMatrix scaled_traceless(int n, uint64_t seed, double norm_cap) {
  const HermitianMatrix x = gen_traceless(n, seed);
  const double nn = x.frobenius_norm();
  if (nn <= norm_cap) return x;
  return HermitianMatrix(norm_cap / nn * x.mat());
}

// ---- 1: Fillmore suite ----

void criterion_fillmore() {
  const auto started = std::chrono::steady_clock::now();
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 200 && ok; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);  // 2..10
    const HermitianMatrix a = gen_fillmore_matrix(n, seed);
    const double tr = a.trace();
    const long t = std::lround(tr);
    const SpectralDecomposition d = eig_hermitian(a);
    const int rank = rank_psd(d);
    if (std::abs(tr - static_cast<double>(t)) > 1e-8 || t < rank || t > 3 * n) {
      ok = false;
      why = "instance " + std::to_string(seed) + " violates rank <= T <= 3n";
      break;
    }
    const ProjectionList plist = decompose_fillmore(a);
    if (static_cast<long>(plist.projections.size()) != t) {
      ok = false;
      why = "instance " + std::to_string(seed) + " returned " +
            std::to_string(plist.projections.size()) + " projections, wanted " +
            std::to_string(t);
      break;
    }
    for (const Projection& p : plist.projections)
      if (!rank_one(p)) {
        ok = false;
        why = "non-rank-one projection at seed " + std::to_string(seed);
      }
    const SumCertificate cert = verify_sum(a, plist, 1e-8);
    if (!cert.pass) {
      ok = false;
      why = "certificate failed at seed " + std::to_string(seed);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (ok && secs >= 10.0) {
    ok = false;
    why = "runtime " + std::to_string(secs) + "s exceeds 10s";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2fs", secs);
  report(1, "fillmore suite, 200 instances", ok, ok ? std::string(buf) : why);
}

// ---- 2: zero-diagonal suite ----

void criterion_zero_diag() {
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
    const int n = 2 + static_cast<int>(seed % 31);  // 2..32
    const HermitianMatrix x = gen_traceless(n, seed);
    const IsotropicResolution res = zero_diagonal_resolution(x, 1e-9 * std::max(1.0, x.frobenius_norm()));
    double max_form = 0.0;
    Matrix sum(n, n);
    for (const Projection& e : res.projections) sum = sum + e.matrix.mat();
    for (const UnitVector& v : res.basis)
      max_form = std::max(max_form, std::abs(quadratic_form(x, v.components)));
    if (max_form > 1e-9 * std::max(1.0, x.frobenius_norm())) {
      ok = false;
      why = "diagonal form " + std::to_string(max_form) + " at seed " + std::to_string(seed);
    }
    if ((sum - Matrix::identity(n)).frobenius_norm() > 1e-8) {
      ok = false;
      why = "resolution incomplete at seed " + std::to_string(seed);
    }
  }
  report(2, "zero-diagonal suite, 100 instances", ok, why);
}

// ---- 3: flatten/lift round-trip ----

void criterion_round_trip() {
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);  // 2..8
    const HermitianMatrix x = scaled_traceless(n, seed, 0.8);
    const HermitianMatrix a = x.shifted(1.0);  // PSD, trace n

    // flatten: a zero-diagonal resolution of A - I turns into projections.
    const IsotropicResolution res = zero_diagonal_resolution(x, 1e-9);
    const ProjectionList flat = flatten_to_projections(a, res);
    const SumCertificate cert = verify_sum(a, flat, 1e-7);
    if (!cert.pass) {
      ok = false;
      why = "flatten certificate failed at seed " + std::to_string(seed);
      break;
    }
    // lift: back to a resolution; defining residuals below 1e-7.
    const auto lifted = resolution_from_projections(a, flat);
    Matrix esum(n, n);
    double flat_resid = 0.0;
    for (const Projection& e : lifted.first.projections) {
      esum = esum + e.matrix.mat();
      const Matrix& em = e.matrix.mat();
      flat_resid = std::max(flat_resid, (em * a.mat() * em - em).frobenius_norm());
    }
    if ((esum - Matrix::identity(n)).frobenius_norm() > 1e-7 || flat_resid > 1e-7) {
      ok = false;
      why = "lift residuals exceed 1e-7 at seed " + std::to_string(seed);
    }
  }
  if (ok) {
    // Explicit 2x2 oracle: A = diag(3/2, 1/2).
    const HermitianMatrix a = HermitianMatrix::diagonal({1.5, 0.5});
    const IsotropicResolution res =
        zero_diagonal_resolution(HermitianMatrix::diagonal({0.5, -0.5}), 1e-12);
    const ProjectionList flat = flatten_to_projections(a, res);
    const double rt3_4 = std::sqrt(3.0) / 4.0;
    Matrix plus(2, 2), minus(2, 2);
    plus(0, 0) = 0.75; plus(0, 1) = rt3_4; plus(1, 0) = rt3_4; plus(1, 1) = 0.25;
    minus(0, 0) = 0.75; minus(0, 1) = -rt3_4; minus(1, 0) = -rt3_4; minus(1, 1) = 0.25;
    bool saw_plus = false, saw_minus = false;
    for (const Projection& p : flat.projections) {
      if ((p.matrix.mat() - plus).frobenius_norm() <= 1e-12) saw_plus = true;
      if ((p.matrix.mat() - minus).frobenius_norm() <= 1e-12) saw_minus = true;
    }
    if (flat.projections.size() != 2 || !saw_plus || !saw_minus) {
      ok = false;
      why = "2x2 oracle P+- not reproduced to 1e-12";
    }
  }
  report(3, "flatten/lift round-trip, 100 instances", ok, why);
}

// ---- 4: split identity ----

void criterion_split_identity() {
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    // PSD with spread spectrum: squares of a seeded Hermitian.
    const HermitianMatrix h = gen_random_hermitian(n, seed);
    const HermitianMatrix a = hermitian_part(h.mat() * h.mat());
    const ExcessDefectSplit split = excess_defect_split(a);
    const Matrix recon = split.a_plus.mat() - split.a_minus.mat() + split.range_proj.matrix.mat();
    const double resid = (a.mat() - recon).frobenius_norm();
    if (resid > 1e-9 * std::max(1.0, a.frobenius_norm())) {
      ok = false;
      why = "matrix identity residual " + std::to_string(resid) + " at seed " +
            std::to_string(seed);
    }
  }
  for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
    SpectralMeasure mu = seed % 3 == 0   ? gen_balanced_measure(seed)
                         : seed % 3 == 1 ? gen_surplus_measure(seed)
                                         : gen_ii1_dyadic(1 + static_cast<int>(seed % 4), seed);
    const TraceFunctionals tf = functional_traces(mu);
    if (tf.tau_a.infinite || tf.tau_range.infinite) {
      if (!(tf.tau_a.infinite && tf.tau_range.infinite)) {
        ok = false;
        why = "infinite parts disagree at seed " + std::to_string(seed);
      }
    } else if (tf.tau_a.value != tf.tau_plus.value - tf.tau_minus.value + tf.tau_range.value) {
      ok = false;
      why = "measure identity failed at seed " + std::to_string(seed);
    }
  }
  report(4, "split identity, 100 matrices + 100 measures", ok, why);
}

// ---- 5: section additivity law ----

void criterion_section_law() {
  bool ok = true;
  std::string why;
  int pairs = 0;
  for (uint64_t seed = 1; pairs < 100 && ok; ++seed) {
    SpectralMeasure mu = seed % 3 == 0   ? gen_balanced_measure(seed)
                         : seed % 3 == 1 ? gen_surplus_measure(seed)
                                         : gen_ii1_dyadic(1 + static_cast<int>(seed % 4), seed);
    const TraceFunctionals tf = functional_traces(mu);
    const SectionPart part = seed % 3 == 0   ? SectionPart::Plus
                             : seed % 3 == 1 ? SectionPart::Minus
                                             : SectionPart::Whole;
    ExtRat cap = part == SectionPart::Plus    ? tf.tau_plus
                 : part == SectionPart::Minus ? tf.tau_minus
                                              : tf.tau_a;
    const Rat frac(static_cast<long>(1 + seed % 6), 7);
    const Rat t = cap.infinite ? Rat(static_cast<long>(seed % 5 + 1)) : cap.value * frac;
    const auto [sub, rest] = trace_section(mu, part, t);
    (void)rest;
    const CommutingCut cut = commuting_cut(mu, sub);
    ++pairs;
    if (!cut.pass()) {
      ok = false;
      why = "additivity failed at seed " + std::to_string(seed) + " part " +
            section_part_name(part);
    }
  }
  report(5, "section additivity, 100 pairs", ok, why);
}

// ---- 6: halving and surplus plans ----

void criterion_plans() {
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 50 && ok; ++seed) {
    const SpectralMeasure mu = gen_balanced_measure(seed);
    const Rat c = functional_traces(mu).tau_plus.value;
    const PlanTree plan = halving_plan(mu, 10);
    if (!verify_plan(plan).pass) {
      ok = false;
      why = "halving verify failed at seed " + std::to_string(seed);
      break;
    }
    if (c == 0) continue;  // degenerate: single projection leaf
    Rat slice = c;
    for (const PlanNode& node : plan.children) {
      if (node.kind == NodeKind::HalvingBlock) {
        slice /= 2;
        if (node.excess != slice || node.defect != slice) {
          ok = false;
          why = "block mass law broken at seed " + std::to_string(seed);
        }
      } else if (node.kind == NodeKind::Tail) {
        if (node.excess != c / rat_pow2(10)) {
          ok = false;
          why = "tail mass is not 2^-10 c at seed " + std::to_string(seed);
        }
      }
    }
  }
  for (uint64_t seed = 1; seed <= 50 && ok; ++seed) {
    const SpectralMeasure mu = gen_surplus_measure(seed);
    const TraceFunctionals tf = functional_traces(mu);
    const Rat s = tf.tau_plus.value - tf.tau_minus.value;
    const PlanTree plan = surplus_plan(mu, 10);
    if (!verify_plan(plan).pass) {
      ok = false;
      why = "surplus verify failed at seed " + std::to_string(seed);
      break;
    }
    if (tf.tau_minus.value != 0) {
      if (plan.children.empty() || plan.children[0].kind != NodeKind::SurplusCut ||
          plan.children[0].excess != s) {
        ok = false;
        why = "carved mass is not tau+ - tau- at seed " + std::to_string(seed);
      }
    } else {
      Rat covered(0);
      for (const PlanNode& node : plan.children)
        if (node.kind == NodeKind::GeometricBlock || node.kind == NodeKind::Tail)
          covered += node.excess;
      if (covered != tf.tau_plus.value) {
        ok = false;
        why = "geometric blocks plus tail do not sum to tau+ at seed " +
              std::to_string(seed);
      }
    }
  }
  report(6, "halving + surplus plans, 50 + 50", ok, why);
}

// ---- 7: dyadic end-to-end ----

void criterion_end_to_end() {
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 30 && ok; ++seed) {
    const int k = 1 + static_cast<int>(seed % 4);
    const SpectralMeasure mu = gen_ii1_dyadic(k, seed);
    const PlanTree plan = ii1_plan(mu);
    if (!verify_plan(plan).pass) {
      ok = false;
      why = "plan verify failed at seed " + std::to_string(seed);
      break;
    }
    const RealizationReport rr = realize_plan(plan, k);
    for (const LeafRealization& leaf : rr.leaves) {
      if (!leaf.materialized || !leaf.certificate.pass) {
        ok = false;
        why = "leaf " + leaf.node + " failed at seed " + std::to_string(seed);
      }
    }
  }
  if (ok) {
    // diag(4,2,1,1) walkthrough: trace 8, so 8 rank-one projections.
    const SpectralMeasure mu(Ambient::II1, {{Rat(4), Rat(1, 4)}, {Rat(2), Rat(1, 4)}}, {},
                             ExtRat::finite(Rat(1, 2)));
    const RealizationReport rr = realize_plan(ii1_plan(mu), 2);
    bool found = false;
    for (const LeafRealization& leaf : rr.leaves) {
      if (leaf.node != "root") continue;
      found = true;
      const Matrix want =
          HermitianMatrix::diagonal({4.0, 2.0, 1.0, 1.0}).mat();
      if (!leaf.materialized || (leaf.matrix.mat() - want).frobenius_norm() > 1e-12 ||
          leaf.projections.projections.size() != 8 || !leaf.certificate.pass ||
          leaf.certificate.sum_residual > 1e-8) {
        ok = false;
        why = "diag(4,2,1,1) did not realize as 8 projections";
      }
      for (const Projection& p : leaf.projections.projections)
        if (!rank_one(p)) {
          ok = false;
          why = "walkthrough projection is not rank one";
        }
    }
    if (!found) {
      ok = false;
      why = "walkthrough root was not materialized";
    }
  }
  report(7, "dyadic end-to-end, 30 instances + walkthrough", ok, why);
}

// ---- 8: identity background ----

void criterion_identity_background() {
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 20 && ok; ++seed) {
    const int m = 3 + static_cast<int>(seed % 6);  // 3..8
    const int surplus = static_cast<int>(seed % 3);
    const HermitianMatrix x0 = scaled_traceless(m, seed, 0.7);
    const HermitianMatrix aw =
        x0.shifted(1.0 + static_cast<double>(surplus) / static_cast<double>(m));
    const IdentityBackgroundOperator op{aw};
    ProjectionList plist;
    try {
      plist = decompose_identity_background(op);
    } catch (const Error& e) {
      ok = false;
      why = std::string("rejected at seed ") + std::to_string(seed) + ": " + e.what();
      break;
    }
    for (const int extra : {0, 1, 2, 5, 9}) {
      const double resid = truncation_residual(op, plist, m + extra);
      if (resid > 1e-8) {
        ok = false;
        why = "truncation residual " + std::to_string(resid) + " at seed " +
              std::to_string(seed) + " dim " + std::to_string(m + extra);
      }
    }
  }
  if (ok) {
    // Non-integer surplus must be rejected with ConditionFailed.
    const HermitianMatrix x0 = scaled_traceless(4, 99, 0.5);
    const IdentityBackgroundOperator op{x0.shifted(1.0 + 0.5 / 4.0)};
    try {
      decompose_identity_background(op);
      ok = false;
      why = "non-integer surplus was accepted";
    } catch (const ConditionError& e) {
      if (e.code() != Errc::ConditionFailed ||
          e.report().reason != ConditionReason::NonIntegerSurplus) {
        ok = false;
        why = "wrong rejection reason for non-integer surplus";
      }
    }
  }
  report(8, "identity background, 20 instances x 5 truncations", ok, why);
}

// ---- 9: condition checker and exit codes ----

int run_cli(const std::string& args) {
  const int raw = std::system((std::string(PROJSUM_BIN) + " " + args + " > /dev/null 2>&1").c_str());
  return (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
}

void criterion_condition_checker() {
  namespace fs = std::filesystem;
  bool ok = true;
  std::string why;

  const ConditionReport halves =
      check_decomposable(HermitianMatrix::diagonal({0.5, 0.5}), CheckMode::MatrixFinite);
  if (halves.decomposable || halves.reason != ConditionReason::TraceBelowRank) {
    ok = false;
    why = "diag(0.5,0.5) reason";
  }
  const ConditionReport nonint =
      check_decomposable(HermitianMatrix::diagonal({1.2, 1.3}), CheckMode::MatrixFinite);
  if (nonint.decomposable || nonint.reason != ConditionReason::NonIntegerTrace) {
    ok = false;
    why = "diag(1.2,1.3) reason";
  }
  const SpectralMeasure sink(Ambient::IIinf, {{Rat(2), Rat(1)}, {Rat(1, 2), Rat(4)}}, {},
                             ExtRat::finite(Rat(0)));
  if (check_measure(sink).decomposable) {
    ok = false;
    why = "defect measure accepted";
  }
  try {
    halving_plan(sink, 3);
    ok = false;
    why = "defect measure planning did not raise";
  } catch (const Error& e) {
    if (e.code() != Errc::NotBalanced && e.code() != Errc::ConditionFailed) {
      ok = false;
      why = "wrong error for defect measure";
    }
  }

  if (ok) {
    const fs::path dir = fs::temp_directory_path() / "projsum_acceptance";
    fs::create_directories(dir);
    const auto write = [&](const char* name, const std::string& text) {
      std::ofstream out(dir / name);
      out << text;
      return (dir / name).string();
    };
    const std::string good =
        write("good.json", R"({"n": 2, "complex": false, "entries": [2, 0, 0, 1]})");
    const std::string halves_path =
        write("halves.json", R"({"n": 2, "complex": false, "entries": [0.5, 0, 0, 0.5]})");
    const std::string garbage = write("garbage.json", "{nope");
    const std::string cert_path = (dir / "cert.json").string();
    if (run_cli("decompose --in " + good + " --out " + cert_path) != 0) {
      ok = false;
      why = "exit 0 path";
    }
    if (ok && run_cli("check --in " + halves_path) != 3) {
      ok = false;
      why = "exit 3 path";
    }
    if (ok && run_cli("decompose --in " + garbage) != 2) {
      ok = false;
      why = "exit 2 path";
    }
    if (ok) {
      Json cert = load_json_file(cert_path);
      cert["projections"][0]["entries"][0] = 0.4;
      save_json_file((dir / "bad_cert.json").string(), cert);
      if (run_cli("verify --in " + (dir / "bad_cert.json").string() + " --target " + good) !=
          1) {
        ok = false;
        why = "exit 1 path";
      }
    }
  }
  report(9, "condition checker + exit codes", ok, why);
}

// ---- 10: determinism ----

std::string suite_fingerprint() {
  std::ostringstream out;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const HermitianMatrix a = gen_fillmore_matrix(4 + static_cast<int>(seed % 4), seed);
    const ProjectionList plist = decompose_fillmore(a);
    SumCertificate cert = verify_sum(a, plist, 1e-8);
    cert.target_hash = matrix_hash(a.mat());
    std::vector<Matrix> ps;
    for (const Projection& p : plist.projections) ps.push_back(p.matrix.mat());
    out << certificate_to_json(cert, ps).dump() << "\n";
  }
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    out << plan_to_json(halving_plan(gen_balanced_measure(seed), 6)).dump() << "\n";
    out << plan_to_json(surplus_plan(gen_surplus_measure(seed), 6)).dump() << "\n";
    const int k = 1 + static_cast<int>(seed % 4);
    const PlanTree plan = ii1_plan(gen_ii1_dyadic(k, seed));
    out << plan_to_json(plan).dump() << "\n";
    for (const LeafRealization& leaf : realize_plan(plan, k).leaves) {
      if (!leaf.materialized) continue;
      SumCertificate cert = leaf.certificate;
      cert.target_hash = matrix_hash(leaf.matrix.mat());
      std::vector<Matrix> ps;
      for (const Projection& p : leaf.projections.projections) ps.push_back(p.matrix.mat());
      out << certificate_to_json(cert, ps).dump() << "\n";
    }
  }
  return out.str();
}

void criterion_determinism() {
  const std::string first = suite_fingerprint();
  const std::string second = suite_fingerprint();
  report(10, "byte-identical reruns", first == second && !first.empty());
}

}  // namespace

int main() {
  criterion_fillmore();
  criterion_zero_diag();
  criterion_round_trip();
  criterion_split_identity();
  criterion_section_law();
  criterion_plans();
  criterion_end_to_end();
  criterion_identity_background();
  criterion_condition_checker();
  criterion_determinism();
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
