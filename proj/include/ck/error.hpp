#pragma once

#include <stdexcept>
#include <string>

namespace ck {

// Every failure mode the library reports deliberately.  Estimator drivers
// catch ck::Error, record errc_name(code()) in the result row, and keep going;
// anything else is a programming bug and is allowed to propagate.
enum class errc {
  invalid_config,
  dimension_mismatch,
  rank_deficient,
  separation,
  non_convergence,
  empty_subpopulation,
  unsupported_world,
  illegal_world,
  missing_column,
  positivity_violation,
  empty_arm_in_stratum,
  zero_variance,
  unmatched_units,
  weak_or_null_first_stage,
  too_many_failed_replicates,
  io_failure,
  empty_input,
  unknown_method,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ck
