#pragma once

#include <string>
#include <utility>
#include <vector>

#include "projsum/plan.hpp"
#include "projsum/projdecomp.hpp"

namespace projsum {

struct LeafRealization {
  std::string node;  // path label, e.g. "HalvingBlock#2/II1Leaf"
  bool materialized = false;
  std::string constraint;  // blocking constraint when skipped
  HermitianMatrix matrix = HermitianMatrix::zero(0);
  ProjectionList projections;
  SumCertificate certificate;
};

struct RealizationReport {
  int resolution = 0;
  std::vector<LeafRealization> leaves;

  int materialized_count() const {
    int c = 0;
    for (const auto& l : leaves) c += l.materialized ? 1 : 0;
    return c;
  }
  bool all_materialized_pass() const {
    for (const auto& l : leaves)
      if (l.materialized && !l.certificate.pass) return false;
    return true;
  }
};

namespace detail {

// Multiplicity of one mass at resolution 2^k; negative when not dyadic.
inline long mass_multiplicity(const Rat& m, int k) {
  const Rat scaled = m * rat_pow2(k);
  if (!is_integer(scaled)) return -1;
  return boost::multiprecision::numerator(scaled).convert_to<long>();
}

// Materializes a finite-atom measure as a diagonal matrix at resolution 2^k
// and decomposes it. In II1 ambient the algebra has dimension 2^k and the
// unrepresented mass pads as kernel; in IIinf the leaf occupies exactly its
// own corner. Eigenvalues are listed in descending order.
inline LeafRealization materialize_measure(const std::string& label,
                                           const SpectralMeasure& mu, int k,
                                           bool projection_leaf) {
  LeafRealization out;
  out.node = label;
  if (!mu.diffuse().empty()) {
    out.constraint = "diffuse spectrum not materializable";
    return out;
  }
  if (mu.background_one().infinite) {
    out.constraint = "infinite background";
    return out;
  }
  std::vector<std::pair<Rat, long>> mults;  // (value, multiplicity) descending
  bool dyadic = true;
  for (const auto& a : mu.atoms()) {
    const long m = mass_multiplicity(a.mass, k);
    if (m < 0) dyadic = false;
    mults.push_back({a.value, m});
  }
  if (mu.background_one().value > 0) {
    const long m = mass_multiplicity(mu.background_one().value, k);
    if (m < 0) dyadic = false;
    mults.push_back({Rat(1), m});
  }
  if (!dyadic) {
    out.constraint = "mass not dyadic at resolution " + std::to_string(k);
    return out;
  }
  std::sort(mults.begin(), mults.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  long support_dim = 0;
  for (const auto& vm : mults) support_dim += vm.second;
  long dim = support_dim;
  if (mu.ambient() == Ambient::II1) dim = 1L << k;
  if (dim == 0) {
    out.constraint = "empty leaf";
    return out;
  }
  const Rat trace = functional_traces(mu).tau_a.value * rat_pow2(k);
  if (!is_integer(trace)) {
    out.constraint = "trace not integral at resolution " + std::to_string(k);
    return out;
  }
  const long trace_int = boost::multiprecision::numerator(trace).convert_to<long>();

  std::vector<double> diag;
  diag.reserve(static_cast<size_t>(dim));
  for (const auto& vm : mults)
    for (long i = 0; i < vm.second; ++i) diag.push_back(rat_to_double(vm.first));
  while (static_cast<long>(diag.size()) < dim) diag.push_back(0.0);
  out.matrix = HermitianMatrix::diagonal(diag);

  if (projection_leaf) {
    // 0/1 diagonal; the decomposition is the projection itself.
    out.projections.target = out.matrix;
    if (support_dim > 0)
      out.projections.projections.push_back(
          {out.matrix, static_cast<int>(support_dim)});
  } else if (trace_int == dim) {
    out.projections = decompose_unit_trace(out.matrix);
  } else {
    out.projections = decompose_fillmore(out.matrix);
  }
  out.certificate = verify_sum(out.matrix, out.projections, 1e-8);
  out.materialized = true;
  return out;
}

inline void realize_walk(const std::vector<PlanNode>& nodes, const std::string& prefix,
                         int k, RealizationReport& report) {
  for (const PlanNode& node : nodes) {
    const std::string label = prefix.empty() ? node.label() : prefix + "/" + node.label();
    if (!node.children.empty()) {
      // Interior node; its mass is carried by the wrapped leaves.
      realize_walk(node.children, label, k, report);
      continue;
    }
    switch (node.kind) {
      case NodeKind::CitedLeaf: {
        LeafRealization skip;
        skip.node = label;
        skip.constraint = "cited: " + node.citation;
        report.leaves.push_back(std::move(skip));
        break;
      }
      case NodeKind::Tail: {
        LeafRealization skip;
        skip.node = label;
        skip.constraint = "symbolic tail";
        report.leaves.push_back(std::move(skip));
        break;
      }
      case NodeKind::ProjectionLeaf:
        report.leaves.push_back(materialize_measure(label, node.measure, k, true));
        break;
      default:
        report.leaves.push_back(materialize_measure(label, node.measure, k, false));
        break;
    }
  }
}

}  // namespace detail

// Bridges a plan to concrete matrices: every leaf whose measure embeds in a
// dyadic matrix algebra of resolution 2^k is materialized and decomposed;
// the rest are reported as skipped with the blocking constraint. For an II1
// pipeline whose scaling is exact, the root operator itself is materialized
// as well (the matrix-level alternative to the cited scaled-projection
// construction).
inline RealizationReport realize_plan(const PlanTree& plan, int k) {
  if (k < 0) raise(Errc::TargetOutOfRange, "resolution must be nonnegative");
  RealizationReport report;
  report.resolution = k;
  if (plan.planner == "ii1" && plan.scale_mode == "exact-realization" && plan.scale != 1)
    report.leaves.push_back(detail::materialize_measure("root", plan.root, k, false));
  detail::realize_walk(plan.children, "", k, report);
  return report;
}

}  // namespace projsum
