#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "projsum/errors.hpp"
#include "projsum/linalg.hpp"
#include "projsum/rational.hpp"

namespace projsum {

enum class Ambient { II1, IIinf };

inline const char* ambient_name(Ambient a) {
  return a == Ambient::II1 ? "II1" : "IIinf";
}

struct Atom {
  Rat value;
  Rat mass;
};

struct Band {
  Rat lo;
  Rat hi;
  Rat density;

  Rat mass() const { return density * (hi - lo); }
};

// Distribution of a positive operator: point masses, constant-density bands,
// and a separate mass at value 1 (the "background"). Canonical form:
//  - no atom at value 1 (merged into background_one)
//  - atoms sorted by value, values distinct, masses positive
//  - bands sorted, interiors disjoint, never straddling 1; adjacent bands of
//    equal density are merged unless they touch at 1 (the split at 1 keeps
//    the excess/defect regions separable)
//  - an INFINITE background only in IIinf; II1 total mass at most 1, the
//    deficit being kernel mass (values are strictly positive, so the kernel
//    has no representation of its own)
class SpectralMeasure {
 public:
  SpectralMeasure() : background_(ExtRat::finite(0)) {}

  SpectralMeasure(Ambient ambient, std::vector<Atom> atoms, std::vector<Band> bands,
                  ExtRat background)
      : ambient_(ambient),
        atoms_(std::move(atoms)),
        diffuse_(std::move(bands)),
        background_(std::move(background)) {
    canonicalize();
    validate();
  }

  Ambient ambient() const { return ambient_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Band>& diffuse() const { return diffuse_; }
  const ExtRat& background_one() const { return background_; }

  bool empty() const {
    return atoms_.empty() && diffuse_.empty() && background_ == ExtRat::finite(0);
  }

 private:
  void canonicalize() {
    // Atom at 1 is background mass by definition.
    std::vector<Atom> kept;
    for (auto& a : atoms_) {
      if (a.value <= 0) raise(Errc::ParseError, "atom value must be positive");
      if (a.mass <= 0) raise(Errc::ParseError, "atom mass must be positive");
      if (a.value == 1) {
        background_ = background_ + a.mass;
      } else {
        kept.push_back(std::move(a));
      }
    }
    atoms_ = std::move(kept);
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& x, const Atom& y) { return x.value < y.value; });
    // Merge duplicated values (arises from adding measures).
    std::vector<Atom> merged;
    for (auto& a : atoms_) {
      if (!merged.empty() && merged.back().value == a.value) {
        merged.back().mass += a.mass;
      } else {
        merged.push_back(std::move(a));
      }
    }
    atoms_ = std::move(merged);

    std::vector<Band> split;
    for (auto& b : diffuse_) {
      if (b.lo <= 0 || b.hi <= b.lo) raise(Errc::ParseError, "band must satisfy 0 < lo < hi");
      if (b.density <= 0) raise(Errc::ParseError, "band density must be positive");
      if (b.lo < 1 && b.hi > 1) {
        split.push_back({b.lo, Rat(1), b.density});
        split.push_back({Rat(1), b.hi, b.density});
      } else {
        split.push_back(std::move(b));
      }
    }
    std::sort(split.begin(), split.end(),
              [](const Band& x, const Band& y) { return x.lo < y.lo; });
    diffuse_.clear();
    for (auto& b : split) {
      if (!diffuse_.empty() && diffuse_.back().hi == b.lo &&
          diffuse_.back().density == b.density && b.lo != 1) {
        diffuse_.back().hi = b.hi;
      } else {
        diffuse_.push_back(std::move(b));
      }
    }
  }

  void validate() const {
    for (const auto& a : atoms_) {
      if (a.value <= 0) raise(Errc::ParseError, "atom value must be positive");
      if (a.mass <= 0) raise(Errc::ParseError, "atom mass must be positive");
    }
    for (size_t i = 0; i < diffuse_.size(); ++i) {
      const Band& b = diffuse_[i];
      if (b.lo <= 0 || b.hi <= b.lo) raise(Errc::ParseError, "band must satisfy 0 < lo < hi");
      if (b.density <= 0) raise(Errc::ParseError, "band density must be positive");
      if (i + 1 < diffuse_.size() && diffuse_[i + 1].lo < b.hi)
        raise(Errc::ParseError, "bands must have disjoint interiors");
    }
    for (const auto& a : atoms_) {
      for (const auto& b : diffuse_) {
        if (a.value >= b.lo && a.value <= b.hi)
          raise(Errc::ParseError, "atom value inside a band");
      }
    }
    if (background_.infinite) {
      if (ambient_ == Ambient::II1)
        raise(Errc::BadAmbient, "INFINITE background requires IIinf ambient");
    } else if (background_.value < 0) {
      raise(Errc::ParseError, "background mass must be nonnegative");
    }
    if (ambient_ == Ambient::II1) {
      Rat total = background_.value;
      for (const auto& a : atoms_) total += a.mass;
      for (const auto& b : diffuse_) total += b.mass();
      if (total > 1) raise(Errc::ParseError, "II1 total mass exceeds 1");
    }
  }

  Ambient ambient_ = Ambient::IIinf;
  std::vector<Atom> atoms_;
  std::vector<Band> diffuse_;
  ExtRat background_;
};

inline bool measure_equal(const SpectralMeasure& x, const SpectralMeasure& y) {
  if (x.ambient() != y.ambient()) return false;
  if (!(x.background_one() == y.background_one())) return false;
  if (x.atoms().size() != y.atoms().size()) return false;
  for (size_t i = 0; i < x.atoms().size(); ++i)
    if (x.atoms()[i].value != y.atoms()[i].value || x.atoms()[i].mass != y.atoms()[i].mass)
      return false;
  if (x.diffuse().size() != y.diffuse().size()) return false;
  for (size_t i = 0; i < x.diffuse().size(); ++i) {
    const Band& a = x.diffuse()[i];
    const Band& b = y.diffuse()[i];
    if (a.lo != b.lo || a.hi != b.hi || a.density != b.density) return false;
  }
  return true;
}

inline ExtRat total_mass(const SpectralMeasure& mu) {
  if (mu.background_one().infinite) return ExtRat::inf();
  Rat total = mu.background_one().value;
  for (const auto& a : mu.atoms()) total += a.mass;
  for (const auto& b : mu.diffuse()) total += b.mass();
  return ExtRat::finite(total);
}

inline Rat max_value(const SpectralMeasure& mu) {
  Rat m = 0;
  if (!(mu.background_one() == ExtRat::finite(0))) m = 1;
  for (const auto& a : mu.atoms()) m = std::max(m, a.value);
  for (const auto& b : mu.diffuse()) m = std::max(m, b.hi);
  return m;
}

struct TraceFunctionals {
  ExtRat tau_a;
  ExtRat tau_plus;
  ExtRat tau_minus;
  ExtRat tau_range;
};

// Excess of a band wholly at or above 1: integral of (v - 1) dv times density.
inline Rat band_excess(const Band& b) {
  return b.density * ((b.hi - 1) * (b.hi - 1) - (b.lo - 1) * (b.lo - 1)) / 2;
}

// Defect of a band wholly at or below 1: integral of (1 - v) dv times density.
inline Rat band_defect(const Band& b) {
  return b.density * ((1 - b.lo) * (1 - b.lo) - (1 - b.hi) * (1 - b.hi)) / 2;
}

inline TraceFunctionals functional_traces(const SpectralMeasure& mu) {
  Rat plus = 0;
  Rat minus = 0;
  Rat trace_finite = 0;
  for (const auto& a : mu.atoms()) {
    if (a.value > 1) plus += (a.value - 1) * a.mass;
    else minus += (1 - a.value) * a.mass;
    trace_finite += a.value * a.mass;
  }
  for (const auto& b : mu.diffuse()) {
    if (b.lo >= 1) plus += band_excess(b);
    else minus += band_defect(b);
    trace_finite += b.density * (b.hi * b.hi - b.lo * b.lo) / 2;
  }
  TraceFunctionals tf;
  tf.tau_plus = ExtRat::finite(plus);
  tf.tau_minus = ExtRat::finite(minus);
  tf.tau_range = total_mass(mu);
  if (tf.tau_range.infinite) {
    tf.tau_a = ExtRat::inf();
  } else {
    tf.tau_a = ExtRat::finite(trace_finite + mu.background_one().value);
    // Identity tau_a = tau_plus - tau_minus + tau_range; exact by
    // construction, checked to guard the band integrals.
    if (tf.tau_a.value != plus - minus + tf.tau_range.value)
      raise(Errc::NumericalFailure, "trace identity violated in functional_traces");
  }
  return tf;
}

enum class SectionPart { Plus, Minus, Whole };

inline const char* section_part_name(SectionPart p) {
  switch (p) {
    case SectionPart::Plus: return "plus";
    case SectionPart::Minus: return "minus";
    case SectionPart::Whole: return "whole";
  }
  return "?";
}

namespace detail {

struct SectionItem {
  int kind;  // 0 atom, 1 band, 2 background
  size_t index;
  Rat key;        // consumption position on the value axis
  ExtRat weight;  // contribution to the sectioned functional
};

// Weight of one measure component under the chosen functional, or a
// zero-weight marker when the component lies outside the part's region.
inline ExtRat atom_section_weight(const Atom& a, SectionPart part) {
  switch (part) {
    case SectionPart::Plus:
      return ExtRat::finite(a.value > 1 ? (a.value - 1) * a.mass : Rat(0));
    case SectionPart::Minus:
      return ExtRat::finite(a.value < 1 ? (1 - a.value) * a.mass : Rat(0));
    case SectionPart::Whole:
      return ExtRat::finite(a.value * a.mass);
  }
  return ExtRat::finite(0);
}

inline ExtRat band_section_weight(const Band& b, SectionPart part) {
  switch (part) {
    case SectionPart::Plus:
      return ExtRat::finite(b.lo >= 1 ? band_excess(b) : Rat(0));
    case SectionPart::Minus:
      return ExtRat::finite(b.hi <= 1 ? band_defect(b) : Rat(0));
    case SectionPart::Whole:
      return ExtRat::finite(b.density * (b.hi * b.hi - b.lo * b.lo) / 2);
  }
  return ExtRat::finite(0);
}

}  // namespace detail

// Cuts a sub-measure with exactly the target amount of the chosen functional
// (excess, defect, or trace), consuming components in ascending value order
// and splitting the boundary component's mass fractionally. The fractional
// split models a commuting projection inside a diffuse abelian subalgebra,
// where every intermediate trace value is attained. Splits are vertical
// (same support, scaled mass/density), which keeps all arithmetic rational.
// When the whole trace is INFINITE the background alone already carries the
// target, so the section restricts to values >= 1 and consumes background
// mass first (the finite-projection exhaustion, with n = 1 sufficing).
inline std::pair<SpectralMeasure, SpectralMeasure> trace_section(const SpectralMeasure& mu,
                                                                 SectionPart part,
                                                                 const Rat& t) {
  if (t < 0) raise(Errc::TargetOutOfRange, "section target must be nonnegative");

  std::vector<detail::SectionItem> items;
  ExtRat part_total = ExtRat::finite(0);
  for (size_t i = 0; i < mu.atoms().size(); ++i) {
    const ExtRat w = detail::atom_section_weight(mu.atoms()[i], part);
    if (w == ExtRat::finite(0)) continue;
    items.push_back({0, i, mu.atoms()[i].value, w});
    part_total = part_total + w;
  }
  for (size_t i = 0; i < mu.diffuse().size(); ++i) {
    const ExtRat w = detail::band_section_weight(mu.diffuse()[i], part);
    if (w == ExtRat::finite(0)) continue;
    items.push_back({1, i, mu.diffuse()[i].lo, w});
    part_total = part_total + w;
  }
  if (part == SectionPart::Whole && !(mu.background_one() == ExtRat::finite(0))) {
    items.push_back({2, 0, Rat(1), mu.background_one()});
    part_total = part_total + mu.background_one();
  }
  if (!part_total.at_least(t))
    raise(Errc::TargetOutOfRange,
          "section target " + rat_to_string(t) + " exceeds " +
              std::string(section_part_name(part)) + " total " + extrat_to_string(part_total));

  // Ascending by value; the background (a point at 1) precedes a band
  // starting at 1, and no other keys can tie.
  std::stable_sort(items.begin(), items.end(),
                   [](const detail::SectionItem& a, const detail::SectionItem& b) {
                     if (a.key != b.key) return a.key < b.key;
                     return a.kind > b.kind;
                   });

  // Infinite whole trace: restrict to values >= 1 before consuming.
  const bool exhaust = part == SectionPart::Whole && part_total.infinite;

  std::vector<Atom> sub_atoms, rest_atoms;
  std::vector<Band> sub_bands, rest_bands;
  ExtRat sub_bg = ExtRat::finite(0);
  ExtRat rest_bg = ExtRat::finite(0);

  Rat rem = t;
  for (const auto& it : items) {
    const bool in_region = !exhaust || it.key >= 1;
    Rat frac = 0;  // portion sent to sub
    if (in_region && rem > 0) {
      if (it.weight.infinite) {
        // Background with infinite mass: take exactly rem (value 1, so mass
        // equals trace contribution); the rest stays infinite.
        sub_bg = sub_bg + rem;
        rest_bg = ExtRat::inf();
        rem = 0;
        continue;
      }
      if (it.weight.value <= rem) {
        frac = 1;
        rem -= it.weight.value;
      } else {
        frac = rem / it.weight.value;
        rem = 0;
      }
    }
    switch (it.kind) {
      case 0: {
        const Atom& a = mu.atoms()[it.index];
        if (frac > 0) sub_atoms.push_back({a.value, a.mass * frac});
        if (frac < 1) rest_atoms.push_back({a.value, a.mass * (1 - frac)});
        break;
      }
      case 1: {
        const Band& b = mu.diffuse()[it.index];
        if (frac > 0) sub_bands.push_back({b.lo, b.hi, b.density * frac});
        if (frac < 1) rest_bands.push_back({b.lo, b.hi, b.density * (1 - frac)});
        break;
      }
      case 2: {
        if (it.weight.infinite) {
          rest_bg = ExtRat::inf();
        } else if (frac > 0 && frac < 1) {
          sub_bg = sub_bg + it.weight.value * frac;
          rest_bg = rest_bg + it.weight.value * (1 - frac);
        } else if (frac == 1) {
          sub_bg = sub_bg + it.weight.value;
        } else {
          rest_bg = rest_bg + it.weight.value;
        }
        break;
      }
    }
  }
  // Components outside the sectioned region were never listed; they belong
  // to the rest wholesale.
  for (size_t i = 0; i < mu.atoms().size(); ++i) {
    if (detail::atom_section_weight(mu.atoms()[i], part) == ExtRat::finite(0))
      rest_atoms.push_back(mu.atoms()[i]);
  }
  for (size_t i = 0; i < mu.diffuse().size(); ++i) {
    if (detail::band_section_weight(mu.diffuse()[i], part) == ExtRat::finite(0))
      rest_bands.push_back(mu.diffuse()[i]);
  }
  if (part != SectionPart::Whole) rest_bg = mu.background_one();

  SpectralMeasure sub(mu.ambient(), std::move(sub_atoms), std::move(sub_bands), sub_bg);
  SpectralMeasure rest(mu.ambient(), std::move(rest_atoms), std::move(rest_bands), rest_bg);
  return {std::move(sub), std::move(rest)};
}

inline SpectralMeasure measure_add(const SpectralMeasure& x, const SpectralMeasure& y) {
  if (x.ambient() != y.ambient())
    raise(Errc::BadAmbient, "cannot add measures with different ambients");
  std::vector<Atom> atoms = x.atoms();
  atoms.insert(atoms.end(), y.atoms().begin(), y.atoms().end());
  std::vector<Band> bands = x.diffuse();
  bands.insert(bands.end(), y.diffuse().begin(), y.diffuse().end());
  // Overlapping bands must be merged by adding densities on elementary
  // segments; the overlay below rebuilds a disjoint cover.
  std::vector<Rat> cuts;
  for (const auto& b : bands) {
    cuts.push_back(b.lo);
    cuts.push_back(b.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Band> overlaid;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    Rat d = 0;
    for (const auto& b : bands)
      if (b.lo <= cuts[i] && cuts[i + 1] <= b.hi) d += b.density;
    if (d > 0) overlaid.push_back({cuts[i], cuts[i + 1], d});
  }
  return SpectralMeasure(x.ambient(), std::move(atoms), std::move(overlaid),
                         x.background_one() + y.background_one());
}

namespace detail {

// Density of a disjoint sorted band list on the elementary segment [x, y).
inline Rat density_on(const std::vector<Band>& bands, const Rat& x, const Rat& y) {
  for (const auto& b : bands)
    if (b.lo <= x && y <= b.hi) return b.density;
  return 0;
}

}  // namespace detail

inline bool is_sub_measure(const SpectralMeasure& sub, const SpectralMeasure& mu) {
  if (sub.ambient() != mu.ambient()) return false;
  for (const auto& a : sub.atoms()) {
    bool found = false;
    for (const auto& b : mu.atoms()) {
      if (b.value == a.value) {
        found = a.mass <= b.mass;
        break;
      }
    }
    if (!found) return false;
  }
  std::vector<Rat> cuts;
  for (const auto& b : sub.diffuse()) {
    cuts.push_back(b.lo);
    cuts.push_back(b.hi);
  }
  for (const auto& b : mu.diffuse()) {
    cuts.push_back(b.lo);
    cuts.push_back(b.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (detail::density_on(sub.diffuse(), cuts[i], cuts[i + 1]) >
        detail::density_on(mu.diffuse(), cuts[i], cuts[i + 1]))
      return false;
  }
  if (sub.background_one().infinite) return mu.background_one().infinite;
  if (mu.background_one().infinite) return true;
  return sub.background_one().value <= mu.background_one().value;
}

// mu - sub, exact. An infinite sub background is rejected: the complement of
// an infinite chunk of an infinite mass is indeterminate.
inline SpectralMeasure measure_subtract(const SpectralMeasure& mu, const SpectralMeasure& sub) {
  if (sub.background_one().infinite)
    raise(Errc::NotSubMeasure, "cannot subtract an INFINITE background");
  if (!is_sub_measure(sub, mu)) raise(Errc::NotSubMeasure, "not a sub-measure");
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) {
    Rat m = a.mass;
    for (const auto& s : sub.atoms())
      if (s.value == a.value) m -= s.mass;
    if (m > 0) atoms.push_back({a.value, m});
  }
  std::vector<Rat> cuts;
  for (const auto& b : sub.diffuse()) {
    cuts.push_back(b.lo);
    cuts.push_back(b.hi);
  }
  for (const auto& b : mu.diffuse()) {
    cuts.push_back(b.lo);
    cuts.push_back(b.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Band> bands;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Rat d = detail::density_on(mu.diffuse(), cuts[i], cuts[i + 1]) -
                  detail::density_on(sub.diffuse(), cuts[i], cuts[i + 1]);
    if (d > 0) bands.push_back({cuts[i], cuts[i + 1], d});
  }
  ExtRat bg = ExtRat::finite(0);
  if (mu.background_one().infinite) {
    bg = ExtRat::inf();
  } else {
    bg = ExtRat::finite(mu.background_one().value - sub.background_one().value);
  }
  return SpectralMeasure(mu.ambient(), std::move(atoms), std::move(bands), bg);
}

// The commuting-cut law: cutting by a commuting projection maps excess to
// excess and defect to defect, so the functionals split additively across
// sub and rest. All equalities are exact rationals.
struct CommutingCut {
  SpectralMeasure sub;
  SpectralMeasure rest;
  TraceFunctionals whole;
  TraceFunctionals sub_traces;
  TraceFunctionals rest_traces;
  bool additive_plus = false;
  bool additive_minus = false;
  bool additive_range = false;
  bool additive_trace = false;

  bool pass() const {
    return additive_plus && additive_minus && additive_range && additive_trace;
  }
};

inline CommutingCut commuting_cut(const SpectralMeasure& mu, const SpectralMeasure& sub) {
  CommutingCut cut;
  cut.sub = sub;
  cut.rest = measure_subtract(mu, sub);
  cut.whole = functional_traces(mu);
  cut.sub_traces = functional_traces(sub);
  cut.rest_traces = functional_traces(cut.rest);
  cut.additive_plus = cut.sub_traces.tau_plus + cut.rest_traces.tau_plus == cut.whole.tau_plus;
  cut.additive_minus =
      cut.sub_traces.tau_minus + cut.rest_traces.tau_minus == cut.whole.tau_minus;
  cut.additive_range =
      cut.sub_traces.tau_range + cut.rest_traces.tau_range == cut.whole.tau_range;
  cut.additive_trace = cut.sub_traces.tau_a + cut.rest_traces.tau_a == cut.whole.tau_a;
  return cut;
}

// Pushforward under v -> v/s (masses preserved, band densities scaled by s).
// A value-s atom lands on 1 and becomes background; existing background
// becomes an atom at 1/s. Used by the II1 pipeline rescale B = A/s.
inline SpectralMeasure rescale_measure(const SpectralMeasure& mu, const Rat& s) {
  if (s <= 0) raise(Errc::TargetOutOfRange, "rescale factor must be positive");
  if (mu.background_one().infinite)
    raise(Errc::BadAmbient, "cannot rescale an INFINITE background");
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({a.value / s, a.mass});
  if (mu.background_one().value > 0 && s != 1)
    atoms.push_back({Rat(1) / s, mu.background_one().value});
  std::vector<Band> bands;
  for (const auto& b : mu.diffuse()) bands.push_back({b.lo / s, b.hi / s, b.density * s});
  const ExtRat bg =
      s == 1 ? mu.background_one() : ExtRat::finite(0);  // value-s atoms merge in canonicalize
  return SpectralMeasure(mu.ambient(), std::move(atoms), std::move(bands), bg);
}

// Decomposability in the measure modes: excess at least defect, no
// integrality (trace values are infinitely divisible in a II factor).
inline ConditionReport check_measure(const SpectralMeasure& mu) {
  ConditionReport report;
  report.mode = mu.ambient() == Ambient::II1 ? CheckMode::MeasureII1 : CheckMode::MeasureIIInf;
  const TraceFunctionals tf = functional_traces(mu);
  const Rat surplus = tf.tau_plus.value - tf.tau_minus.value;
  report.witness = rat_to_double(surplus);
  report.detail = "tau+ - tau- = " + rat_to_string(surplus);
  if (surplus >= 0) {
    report.decomposable = true;
    report.reason = ConditionReason::None;
  } else {
    report.decomposable = false;
    report.reason = ConditionReason::DefectExceedsExcess;
  }
  return report;
}

}  // namespace projsum
