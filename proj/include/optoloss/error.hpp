#pragma once

#include <stdexcept>
#include <string>

namespace optoloss {

// Bad physical input or malformed data.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

// Fock cutoff too small; carries the cutoffs that would have passed.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, int suggested_cav, int suggested_mech = 0)
      : std::runtime_error(what), cav_(suggested_cav), mech_(suggested_mech) {}
  int suggested_cav() const { return cav_; }
  int suggested_mech() const { return mech_; }

 private:
  int cav_;
  int mech_;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridCoverageError : public std::runtime_error {
 public:
  GridCoverageError(const std::string& what, double integral)
      : std::runtime_error(what), integral_(integral) {}
  double integral() const { return integral_; }

 private:
  double integral_;
};

}  // namespace optoloss
