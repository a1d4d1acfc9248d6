#pragma once

#include <stdexcept>
#include <string>

namespace geneo {

/// Failure categories raised by the library. Each maps to a distinct
/// exception type so callers can catch the ones they can recover from.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot was <= 0.
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};

class NoConvergence : public Error {
public:
  using Error::Error;
};

class SizeMismatch : public Error {
public:
  using Error::Error;
};

class EmptySubdomain : public Error {
public:
  using Error::Error;
};

/// Gram matrix of a projection basis is not SPD on the working space.
class SingularGram : public Error {
public:
  using Error::Error;
};

class EmptyCoarseSpace : public Error {
public:
  using Error::Error;
};

class MaxIterations : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace geneo
