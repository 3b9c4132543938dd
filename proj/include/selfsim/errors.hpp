#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace selfsim {

/// A parameter lies outside its mathematical domain (e.g. a Hurst index not in (0,1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent or malformed arguments: invalid method/process pairing,
/// mismatched grids, too few replicates.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(std::size_t pivot, double last_jitter)
      : NumericalError("matrix is not positive definite: factorization failed at pivot " +
                       std::to_string(pivot) + " (jitter " + std::to_string(last_jitter) + ")"),
        pivot_(pivot),
        jitter_(last_jitter) {}

  std::size_t pivot() const noexcept { return pivot_; }
  double last_jitter() const noexcept { return jitter_; }

 private:
  std::size_t pivot_;
  double jitter_;
};

class EmbeddingFailure : public NumericalError {
 public:
  EmbeddingFailure(double most_negative, std::size_t embedding_size)
      : NumericalError("circulant embedding is not nonnegative definite at m = " +
                       std::to_string(embedding_size) + " (most negative eigenvalue " +
                       std::to_string(most_negative) + ")"),
        most_negative_(most_negative),
        m_(embedding_size) {}

  double most_negative() const noexcept { return most_negative_; }
  std::size_t embedding_size() const noexcept { return m_; }

 private:
  double most_negative_;
  std::size_t m_;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(double achieved, double requested)
      : NumericalError("quadrature did not converge: achieved error estimate " +
                       std::to_string(achieved) + ", requested " + std::to_string(requested)),
        achieved_(achieved) {}

  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace selfsim
