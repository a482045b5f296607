#pragma once

#include <stdexcept>
#include <string>

namespace projsum {

// Error codes shared across the library. The CLI maps these to process exit
// codes: parse/schema errors -> 2, condition/precondition failures -> 3,
// numerical failures -> 4.
enum class Errc {
  NumericalFailure,
  NotPositive,
  NotSymmetry,
  Definite,
  NotTraceless,
  ZeroMatrix,
  NotIsotropicWitness,
  NotFlat,
  TraceMismatch,
  NotSum,
  ConditionFailed,
  TargetOutOfRange,
  NotSubMeasure,
  NotBalanced,
  NotSurplus,
  BadAmbient,
  ParseError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::NotPositive: return "NotPositive";
    case Errc::NotSymmetry: return "NotSymmetry";
    case Errc::Definite: return "Definite";
    case Errc::NotTraceless: return "NotTraceless";
    case Errc::ZeroMatrix: return "ZeroMatrix";
    case Errc::NotIsotropicWitness: return "NotIsotropicWitness";
    case Errc::NotFlat: return "NotFlat";
    case Errc::TraceMismatch: return "TraceMismatch";
    case Errc::NotSum: return "NotSum";
    case Errc::ConditionFailed: return "ConditionFailed";
    case Errc::TargetOutOfRange: return "TargetOutOfRange";
    case Errc::NotSubMeasure: return "NotSubMeasure";
    case Errc::NotBalanced: return "NotBalanced";
    case Errc::NotSurplus: return "NotSurplus";
    case Errc::BadAmbient: return "BadAmbient";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace projsum
