#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace kirchhoff {

/// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDomainError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A field was used with operators assembled on a different mesh.
class ProvenanceError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap. Carries the last residual and,
/// when meaningful, the last iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual,
                   Eigen::VectorXd last_iterate = {})
      : Error(what),
        last_residual_(last_residual),
        last_iterate_(std::move(last_iterate)) {}

  double last_residual() const noexcept { return last_residual_; }
  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_residual_;
  Eigen::VectorXd last_iterate_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class InvalidSeedError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDomainError : public Error {
 public:
  using Error::Error;
};

class PositivityError : public Error {
 public:
  using Error::Error;
};

/// The Newton linearization is (numerically) singular: either the banded base
/// or the Sherman-Morrison denominator, or the lifted bordered system.
class SingularJacobianError : public Error {
 public:
  enum class Source { base, denominator, bordered };

  SingularJacobianError(const std::string& what, Source source, double indicator)
      : Error(what), source_(source), indicator_(indicator) {}

  Source source() const noexcept { return source_; }
  /// rcond of the base, |denominator|, or the bordered residual, by source.
  double indicator() const noexcept { return indicator_; }

 private:
  Source source_;
  double indicator_;
};

class NoPrimaryBifurcationError : public Error {
 public:
  using Error::Error;
};

class InvalidNonlinearityError : public Error {
 public:
  using Error::Error;
};

/// Spectral inputs contradict each other (e.g. mu2 < mu1).
class InconsistentSpectrumError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kirchhoff
