#pragma once

#include <stdexcept>
#include <string>

namespace zrp {

enum class Errc {
  not_positive,
  not_monotone,
  out_of_window,
  empty_site,
  divergent,
  window_too_small,
  not_a_step,
  window_breach,
  tagging_disabled,
  range_outside_window,
  window_mismatch,
  label_mismatch,
  multiple_discrepancies,
  no_second_class,
  not_totally_asymmetric,
  not_constant_rate,
  out_of_support,
  out_of_range,
  partial_asymmetry,
  truncation_too_small,
  invalid_config,
  io_failure,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace zrp
