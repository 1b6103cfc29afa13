// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hsqkd {

enum class errc {
  invalid_m,
  invalid_range,
  unsupported_source,
  degenerate_branch,
  degenerate_statistics,
  degenerate_bounds,
  negative_loss,
  zero_yield,
  out_of_domain,
  invalid_trials,
  config_parse,
  grid_mismatch,
  io_write,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_m: return "INVALID_M";
    case errc::invalid_range: return "INVALID_RANGE";
    case errc::unsupported_source: return "UNSUPPORTED_SOURCE";
    case errc::degenerate_branch: return "DEGENERATE_BRANCH";
    case errc::degenerate_statistics: return "DEGENERATE_STATISTICS";
    case errc::degenerate_bounds: return "DEGENERATE_BOUNDS";
    case errc::negative_loss: return "NEGATIVE_LOSS";
    case errc::zero_yield: return "ZERO_YIELD";
    case errc::out_of_domain: return "OUT_OF_DOMAIN";
    case errc::invalid_trials: return "INVALID_TRIALS";
    case errc::config_parse: return "CONFIG_PARSE";
    case errc::grid_mismatch: return "GRID_MISMATCH";
    case errc::io_write: return "IO_WRITE";
  }
  return "UNKNOWN";
}

/// Exception carrying a machine-checkable error code.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace hsqkd
