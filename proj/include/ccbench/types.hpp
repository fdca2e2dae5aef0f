#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ccb {

using Seconds = double;
using BitsPerSecond = double;
using Bytes = std::int64_t;

/// Every data packet is a full-sized segment.
inline constexpr Bytes kMss = 1500;

inline constexpr BitsPerSecond kMbps = 1e6;
inline constexpr Seconds kMs = 1e-3;

/// Highest bottleneck rate any trace may carry.
inline constexpr BitsPerSecond kMaxTraceRate = 200 * kMbps;

enum class ErrorCode {
  kInvalidArgument = 1,
  kUnknownScheme,
  kIo,
  kNoData,
  kConfig,
};

/// Base exception for the library. The C API maps `code()` onto its status
/// values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error invalid_argument(const std::string& what) {
  return Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace ccb
