#pragma once

// Fixed-seed oracle and invariant suites behind `pdpp verify`.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace pdpp {

struct VerifyOptions {
  /// Negative control: corrupts one off-diagonal entry of the kernel copy
  /// inspected by the symmetry suite.
  bool inject_asymmetric_kernel = false;
};

struct SuiteReport {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  std::vector<std::string> failures;  // first few failed assertions
  std::map<std::string, double> metrics;
};

struct VerifyReport {
  std::vector<SuiteReport> suites;

  bool passed() const noexcept;
  std::string to_json() const;
  std::string to_text() const;
};

VerifyReport run_verify(const VerifyOptions& opts = {});

}  // namespace pdpp
