#include "riskstab/error.hpp"

namespace riskstab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NegativeTimestamp: return "NegativeTimestamp";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::EmptyId: return "EmptyId";
    case ErrorKind::InvalidVariant: return "InvalidVariant";
    case ErrorKind::DuplicateEpisode: return "DuplicateEpisode";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::MissingVitals: return "MissingVitals";
    case ErrorKind::InsufficientSupport: return "InsufficientSupport";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewPositives: return "TooFewPositives";
    case ErrorKind::OneClassOnly: return "OneClassOnly";
    case ErrorKind::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorKind::MissingTrajectory: return "MissingTrajectory";
    case ErrorKind::TrajectoryMismatch: return "TrajectoryMismatch";
    case ErrorKind::ProbeOutOfRange: return "ProbeOutOfRange";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::UnknownModality: return "UnknownModality";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      index_(index) {}

Error Error::with_stage(std::string stage) const {
  Error tagged(kind_, "[" + stage + "] " + (what() + to_string(kind_).size() + 2),
               index_);
  tagged.stage_ = std::move(stage);
  return tagged;
}

}  // namespace riskstab
