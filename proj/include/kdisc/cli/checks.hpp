#pragma once

// Property suites run by `kdisc check`. Every check measures a worst-case
// quantity against a fixed tolerance and reports both.

#include <cstdint>
#include <string>
#include <vector>

namespace kdisc::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct CheckOptions {
  std::uint32_t seed = 0;
};

CheckResult check_gram_psd(const CheckOptions& opt = {});
CheckResult check_partition_of_unity(const CheckOptions& opt = {});
CheckResult check_projection_idempotence(const CheckOptions& opt = {});
CheckResult check_kernel_gradients(const CheckOptions& opt = {});
CheckResult check_objective_gradients(const CheckOptions& opt = {});
CheckResult check_erfinv_round_trip(const CheckOptions& opt = {});
CheckResult check_kernel_invariants(const CheckOptions& opt = {});
CheckResult check_enumeration(const CheckOptions& opt = {});
CheckResult check_simd_equivalence(const CheckOptions& opt = {});
CheckResult check_sampling(const CheckOptions& opt = {});
CheckResult check_discrepancy_invariants(const CheckOptions& opt = {});
CheckResult check_descent_monotone(const CheckOptions& opt = {});

/// All suites above, in declaration order.
std::vector<CheckResult> run_checks(const CheckOptions& opt = {});

/// `PASS name: measured <= tolerance (detail)` / `FAIL ...`.
std::string format_check(const CheckResult& r);

}  // namespace kdisc::cli
