#include <catch2/catch_amalgamated.hpp>

#include "projsum/plan.hpp"

using namespace projsum;

namespace {

SpectralMeasure atoms_only(Ambient amb, std::vector<Atom> atoms) {
  return SpectralMeasure(amb, std::move(atoms), {}, ExtRat::finite(0));
}

Rat rat(long p, long q = 1) { return Rat(p, q); }

const PlanNode* find_node(const PlanTree& plan, const std::string& label) {
  for (const auto& n : plan.children)
    if (n.label() == label) return &n;
  return nullptr;
}

}  // namespace

TEST_CASE("halving plan on a balanced measure") {
  SpectralMeasure mu = atoms_only(Ambient::IIinf, {{rat(2), rat(1)}, {rat(1, 2), rat(2)}});

  SECTION("block n carries excess and defect exactly 2^-n") {
    PlanTree plan = halving_plan(mu, 3);
    REQUIRE(plan.planner == "halving");
    REQUIRE(plan.children.size() == 4);  // 3 blocks + tail

    const PlanNode* b1 = find_node(plan, "HalvingBlock#1");
    REQUIRE(b1 != nullptr);
    REQUIRE(measure_equal(
        b1->measure, atoms_only(Ambient::IIinf, {{rat(2), rat(1, 2)}, {rat(1, 2), rat(1)}})));
    REQUIRE(b1->excess == rat(1, 2));
    REQUIRE(b1->defect == rat(1, 2));
    REQUIRE(b1->children.size() == 1);
    REQUIRE(b1->children[0].kind == NodeKind::II1Leaf);
    REQUIRE(b1->children[0].unit_trace);

    const PlanNode* b2 = find_node(plan, "HalvingBlock#2");
    REQUIRE(b2->excess == rat(1, 4));
    const auto tf2 = functional_traces(b2->measure);
    REQUIRE(tf2.tau_plus == ExtRat::finite(rat(1, 4)));
    REQUIRE(tf2.tau_minus == ExtRat::finite(rat(1, 4)));

    const PlanNode* tail = find_node(plan, "Tail");
    REQUIRE(tail != nullptr);
    REQUIRE(tail->depth == 3);
    const auto tft = functional_traces(tail->measure);
    REQUIRE(tft.tau_plus == ExtRat::finite(rat(1, 8)));
    REQUIRE(tft.tau_minus == ExtRat::finite(rat(1, 8)));

    const PlanCertificate cert = verify_plan(plan);
    REQUIRE(cert.pass);
  }

  SECTION("background mass rides in the tail") {
    SpectralMeasure with_bg(Ambient::IIinf, {{rat(2), rat(1)}, {rat(1, 2), rat(2)}}, {},
                            ExtRat::finite(rat(7)));
    PlanTree plan = halving_plan(with_bg, 2);
    const PlanNode* tail = find_node(plan, "Tail");
    REQUIRE(tail->measure.background_one() == ExtRat::finite(rat(7)));
    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("projection distribution gives a single ProjectionLeaf") {
    SpectralMeasure proj(Ambient::IIinf, {}, {}, ExtRat::finite(rat(3)));
    PlanTree plan = halving_plan(proj, 5);
    REQUIRE(plan.children.size() == 1);
    REQUIRE(plan.children[0].kind == NodeKind::ProjectionLeaf);
    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("unbalanced and wrong-ambient inputs rejected") {
    try {
      halving_plan(atoms_only(Ambient::IIinf, {{rat(2), rat(1)}}), 3);
      FAIL("expected NotBalanced");
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::NotBalanced);
    }
    REQUIRE_THROWS_AS(halving_plan(atoms_only(Ambient::II1, {{rat(2), rat(1, 4)}}), 3), Error);
  }

  SECTION("diffuse balanced measure halves exactly") {
    // Density 1 on [1/2,1] and [1,2]: defect 1/8 vs excess 1/2; rebalance
    // with extra defect atoms.
    SpectralMeasure spread(Ambient::IIinf, {{rat(1, 4), rat(1, 2)}},
                           {{rat(1, 2), rat(2), rat(1)}}, ExtRat::finite(0));
    const auto tf = functional_traces(spread);
    REQUIRE(tf.tau_plus == ExtRat::finite(rat(1, 2)));
    REQUIRE(tf.tau_minus == ExtRat::finite(rat(1, 2)));
    PlanTree plan = halving_plan(spread, 4);
    REQUIRE(verify_plan(plan).pass);
  }
}

TEST_CASE("plan verification catches corruption") {
  SpectralMeasure mu = atoms_only(Ambient::IIinf, {{rat(2), rat(1)}, {rat(1, 2), rat(2)}});
  PlanTree plan = halving_plan(mu, 3);

  SECTION("tampered block mass fails with a node diagnostic") {
    for (auto& node : plan.children) {
      if (node.label() == "HalvingBlock#2") {
        node.measure = atoms_only(Ambient::IIinf, {{rat(2), rat(1, 3)}, {rat(1, 2), rat(2, 3)}});
      }
    }
    const PlanCertificate cert = verify_plan(plan);
    REQUIRE_FALSE(cert.pass);
    bool block_flagged = false;
    bool root_flagged = false;
    for (const auto& c : cert.checks) {
      if (c.node == "HalvingBlock#2" && !c.ok) block_flagged = true;
      if (c.node == "root" && !c.ok) root_flagged = true;
    }
    REQUIRE(block_flagged);
    REQUIRE(root_flagged);
  }

  SECTION("tampered stored excess fails the 2^-n law") {
    for (auto& node : plan.children)
      if (node.label() == "HalvingBlock#1") node.excess = rat(1, 3);
    REQUIRE_FALSE(verify_plan(plan).pass);
  }
}

TEST_CASE("surplus plan") {
  SECTION("oracle: atoms {(3,1),(1/2,1)} carves 3/4 of the excess atom") {
    SpectralMeasure mu = atoms_only(Ambient::IIinf, {{rat(3), rat(1)}, {rat(1, 2), rat(1)}});
    PlanTree plan = surplus_plan(mu, 3);
    REQUIRE(plan.planner == "surplus");

    const PlanNode* cut = find_node(plan, "SurplusCut");
    REQUIRE(cut != nullptr);
    REQUIRE(cut->excess == rat(3, 2));
    REQUIRE(measure_equal(cut->measure, atoms_only(Ambient::IIinf, {{rat(3), rat(3, 4)}})));
    REQUIRE(cut->children.size() == 1);
    REQUIRE(cut->children[0].kind == NodeKind::II1Leaf);

    // Remainder is balanced at 1/2 each; its halving blocks follow.
    const PlanNode* b1 = find_node(plan, "HalvingBlock#1");
    REQUIRE(b1 != nullptr);
    REQUIRE(b1->excess == rat(1, 4));
    const PlanNode* tail = find_node(plan, "Tail");
    REQUIRE(functional_traces(tail->measure).tau_plus == ExtRat::finite(rat(1, 16)));

    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("pure excess gives geometric blocks and a projection leftover") {
    SpectralMeasure mu(Ambient::IIinf, {{rat(2), rat(1)}}, {}, ExtRat::finite(rat(5)));
    PlanTree plan = surplus_plan(mu, 4);
    const PlanNode* g1 = find_node(plan, "GeometricBlock#1");
    REQUIRE(g1 != nullptr);
    REQUIRE(g1->excess == rat(1, 2));
    REQUIRE(measure_equal(g1->measure, atoms_only(Ambient::IIinf, {{rat(2), rat(1, 2)}})));
    const PlanNode* g2 = find_node(plan, "GeometricBlock#2");
    REQUIRE(g2->excess == rat(1, 4));
    const PlanNode* proj = find_node(plan, "ProjectionLeaf");
    REQUIRE(proj != nullptr);
    REQUIRE(proj->measure.background_one() == ExtRat::finite(rat(5)));
    const PlanNode* tail = find_node(plan, "Tail");
    REQUIRE(functional_traces(tail->measure).tau_plus == ExtRat::finite(rat(1, 16)));
    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("balanced input is rejected") {
    SpectralMeasure mu = atoms_only(Ambient::IIinf, {{rat(2), rat(1)}, {rat(1, 2), rat(2)}});
    try {
      surplus_plan(mu, 3);
      FAIL("expected NotSurplus");
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::NotSurplus);
    }
  }
}

TEST_CASE("ii1 plan") {
  SECTION("oracle: atoms {(5/2,1/4),(1/2,3/4)} has s = 1") {
    SpectralMeasure mu = atoms_only(Ambient::II1, {{rat(5, 2), rat(1, 4)}, {rat(1, 2), rat(3, 4)}});
    PlanTree plan = ii1_plan(mu);
    REQUIRE(plan.planner == "ii1");
    REQUIRE(plan.scale == rat(1));
    REQUIRE(plan.children.size() == 1);
    REQUIRE(plan.children[0].kind == NodeKind::II1Leaf);
    REQUIRE(plan.children[0].unit_trace);
    REQUIRE(measure_equal(plan.children[0].measure, mu));
    REQUIRE(plan.scale_mode == "exact-realization");
    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("rescale maps the value-s atom to background") {
    // tau = 2/4 + (2/3)/4 = 2/3 equals the second atom's value.
    SpectralMeasure mu = atoms_only(Ambient::II1, {{rat(2), rat(1, 4)}, {rat(2, 3), rat(1, 4)}});
    PlanTree plan = ii1_plan(mu);
    REQUIRE(plan.scale == rat(2, 3));
    const SpectralMeasure& b = plan.children[0].measure;
    REQUIRE(b.atoms().size() == 1);
    REQUIRE(b.atoms()[0].value == rat(3));
    REQUIRE(b.atoms()[0].mass == rat(1, 4));
    REQUIRE(b.background_one() == ExtRat::finite(rat(1, 4)));
    REQUIRE(functional_traces(b).tau_a == ExtRat::finite(rat(1)));
    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("non-dyadic masses fall back to the cited scaling") {
    SpectralMeasure mu = atoms_only(Ambient::II1, {{rat(3), rat(1, 3)}});
    PlanTree plan = ii1_plan(mu);
    REQUIRE(plan.scale_mode == "cited-scaling");
    REQUIRE(plan.children.size() == 2);
    REQUIRE(plan.children[1].kind == NodeKind::CitedLeaf);
    REQUIRE(plan.children[1].citation == std::string(kCitationScaledProjection));
    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("projection distribution gives a trivial plan") {
    SpectralMeasure mu(Ambient::II1, {}, {}, ExtRat::finite(rat(1, 2)));
    PlanTree plan = ii1_plan(mu);
    REQUIRE(plan.children.size() == 1);
    REQUIRE(plan.children[0].kind == NodeKind::ProjectionLeaf);
    REQUIRE(verify_plan(plan).pass);
  }

  SECTION("defect exceeding excess fails the condition") {
    SpectralMeasure mu = atoms_only(Ambient::II1, {{rat(1, 2), rat(1, 2)}});
    try {
      ii1_plan(mu);
      FAIL("expected ConditionError");
    } catch (const ConditionError& e) {
      REQUIRE(e.code() == Errc::ConditionFailed);
      REQUIRE(e.report().reason == ConditionReason::DefectExceedsExcess);
      REQUIRE(e.report().mode == CheckMode::MeasureII1);
    }
    REQUIRE_THROWS_AS(ii1_plan(atoms_only(Ambient::IIinf, {{rat(2), rat(1)}})), Error);
  }
}

TEST_CASE("plan mass conservation holds across planners") {
  // The invariant: leaf measures plus tail reassemble the root exactly.
  std::vector<PlanTree> plans;
  plans.push_back(
      halving_plan(atoms_only(Ambient::IIinf, {{rat(7, 2), rat(2, 5)}, {rat(1, 4), rat(4, 3)}}),
                   6));
  plans.push_back(surplus_plan(
      atoms_only(Ambient::IIinf, {{rat(3), rat(1)}, {rat(2, 3), rat(1, 2)}}), 5));
  plans.push_back(ii1_plan(atoms_only(Ambient::II1, {{rat(3), rat(1, 8)}, {rat(1, 2), rat(1, 2)}})));
  for (const auto& plan : plans) {
    const PlanCertificate cert = verify_plan(plan);
    REQUIRE(cert.pass);
    for (const auto& c : cert.checks) REQUIRE(c.ok);
  }
}
