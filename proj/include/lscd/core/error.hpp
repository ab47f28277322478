#pragma once

#include <stdexcept>
#include <string>

namespace lscd {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or batch shapes that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain.
class ValueError : public Error {
 public:
  using Error::Error;
};

/// File or schema problems while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values detected during training or sampling.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace lscd
