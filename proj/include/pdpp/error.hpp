#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdpp {

/// Bad arguments or a malformed configuration. Maps to CLI exit code 1.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine failed to converge.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::size_t iterations)
      : std::runtime_error(what), iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : std::runtime_error("matrix is not positive definite: pivot " +
                           std::to_string(pivot) + " = " +
                           std::to_string(value)),
        pivot_(pivot),
        value_(value) {}

  std::size_t pivot() const noexcept { return pivot_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

/// Greedy selection ran out of candidates with a positive marginal gain.
class RankDeficient : public std::runtime_error {
 public:
  RankDeficient(std::size_t selected, std::size_t requested)
      : std::runtime_error("kernel is rank deficient: selected " +
                           std::to_string(selected) + " of " +
                           std::to_string(requested) + " items"),
        selected_(selected) {}

  std::size_t selected() const noexcept { return selected_; }

 private:
  std::size_t selected_;
};

class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Exhaustive search refused because the subset count is above the cap.
class SearchSpaceTooLarge : public std::runtime_error {
 public:
  SearchSpaceTooLarge(double count, double cap)
      : std::runtime_error("search space of " + std::to_string(count) +
                           " subsets exceeds the cap of " +
                           std::to_string(cap)),
        count_(count) {}

  double count() const noexcept { return count_; }

 private:
  double count_;
};

}  // namespace pdpp
