#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace hampack {

using Vertex = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr Vertex no_vertex = ~Vertex{0};
inline constexpr EdgeId no_edge = ~EdgeId{0};

struct Edge {
  Vertex tail = 0;
  Vertex head = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Packs an ordered pair into one sortable key.
constexpr std::uint64_t pair_key(Vertex tail, Vertex head) {
  return (std::uint64_t{tail} << 32) | std::uint64_t{head};
}

enum class ErrorCode {
  tail_underflow,
  infeasible_average_degree,
  conditioning_failure,
  rejection_stall,
  contract_violation,
  invalid_input,
  refused,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::tail_underflow: return "tail underflow";
    case ErrorCode::infeasible_average_degree: return "infeasible average degree";
    case ErrorCode::conditioning_failure: return "conditioning failure";
    case ErrorCode::rejection_stall: return "rejection stall";
    case ErrorCode::contract_violation: return "contract violation";
    case ErrorCode::invalid_input: return "invalid input";
    case ErrorCode::refused: return "refused";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A randomized phase that did not reach its postcondition. Not an error:
/// the trial is reported as failed and the harness moves on.
struct PhaseFailure {
  std::string phase;
  std::size_t index = 0;
  std::string detail;
};

template <class T>
using Outcome = std::variant<T, PhaseFailure>;

template <class T>
bool succeeded(const Outcome<T>& outcome) {
  return std::holds_alternative<T>(outcome);
}

}  // namespace hampack
