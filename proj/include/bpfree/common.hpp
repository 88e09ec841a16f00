#pragma once
/**
 * @file common.hpp
 * @brief Shared aliases, the error type and deterministic RNG stream helpers.
 */

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace bpfree {

using Index = Eigen::Index;

enum class ErrorCode {
  UnsupportedLevel,
  InvalidDimension,
  DimensionMismatch,
  InvalidLayout,
  InvalidConfig,
  NonFiniteLoss,
  ZeroReferenceNorm,
  OracleNotBuilt,
  SolverFailure,
  OutOfDomain,
  UnknownArchitecture,
  IoError,
  MissingRuns,
};

const char* to_string(ErrorCode code);

/// Library error. The code lets the CLI map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by the numbers rather than by the inputs.
  bool numerical() const noexcept {
    return code_ == ErrorCode::NonFiniteLoss || code_ == ErrorCode::SolverFailure;
  }

 private:
  ErrorCode code_;
};

/// splitmix64 finalizer; used to key independent RNG streams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed) noexcept { return mix64(seed); }

template <typename... Rest>
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t next, Rest... rest) noexcept {
  return stream_key(mix64(seed) ^ mix64(next + 0x632be59bd9b4e019ULL), rest...);
}

/// Engine for the stream identified by (seed, ids...). Same key, same draws.
template <typename... Ids>
std::mt19937_64 make_stream(std::uint64_t seed, Ids... ids) {
  return std::mt19937_64(stream_key(seed, static_cast<std::uint64_t>(ids)...));
}

}  // namespace bpfree
