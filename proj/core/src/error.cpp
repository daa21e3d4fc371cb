#include "ness/error.hpp"

namespace ness {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotRelaxing: return "NotRelaxing";
    case ErrorKind::SolveFailed: return "SolveFailed";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::DegenerateNess: return "DegenerateNess";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ness
