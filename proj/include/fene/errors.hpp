#pragma once

#include <stdexcept>
#include <string>

namespace fene {

// Invalid lattice size, mesh, Besov exponents, or simulation configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An argument outside the operation's domain (e.g. a block index or a point off the ball).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A caller-side precondition was not met (non-zero mass, mismatched shapes).
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

// Non-finite values, step-size violations, failed factorization.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A measured certificate inequality failed.
struct CertificateViolation : std::runtime_error {
  CertificateViolation(const std::string& what, double time)
      : std::runtime_error(what), time(time) {}
  double time;
};

}  // namespace fene
