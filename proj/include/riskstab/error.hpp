#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace riskstab {

enum class ErrorKind {
  NegativeTimestamp,
  NonFiniteValue,
  EmptyId,
  InvalidVariant,
  DuplicateEpisode,
  InvalidConfig,
  MissingVitals,
  InsufficientSupport,
  EmptyInput,
  TooFewPositives,
  OneClassOnly,
  InvalidTrajectory,
  MissingTrajectory,
  TrajectoryMismatch,
  ProbeOutOfRange,
  MalformedRecord,
  UnknownModality,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `index` carries the offending
/// observation index or 1-based file line, when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<std::size_t>& index() const noexcept { return index_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Copy of this error tagged with the pipeline stage it escaped from.
  Error with_stage(std::string stage) const;

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
  std::string stage_;
};

}  // namespace riskstab
