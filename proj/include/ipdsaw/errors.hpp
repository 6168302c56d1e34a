#pragma once

#include <stdexcept>
#include <string>

namespace ipdsaw {

/// A computation would exceed a configured size budget (cell count,
/// enumeration cutoff). The CLI maps this to exit code 64.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimate did not meet its convergence precondition, so the
/// requested fit or derived quantity is refused.
class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ipdsaw
