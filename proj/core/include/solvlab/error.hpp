#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace solvlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Grid spacing does not resolve the solute scale (h > r/4).
class GridTooCoarseError : public Error {
public:
  using Error::Error;
};

/// A charge profile support crosses the box boundary.
class ProfileClippedError : public Error {
public:
  using Error::Error;
};

/// Exponent of an ionic B model left the double-precision range.
class OverflowError : public Error {
public:
  using Error::Error;
};

/// A NaN or infinity appeared in solver input or iterates.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Capacities too large (or not finite) for the max-flow solver.
class MaxFlowOverflowError : public Error {
public:
  using Error::Error;
};

class EmptyLibraryError : public Error {
public:
  using Error::Error;
};

class MissingDirectionError : public Error {
public:
  using Error::Error;
};

/// Kernel H^-1 evaluation hit coincident atoms.
class SingularSelfTermError : public Error {
public:
  using Error::Error;
};

/// Experiment or configuration file could not be parsed.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

class UnitError : public Error {
public:
  using Error::Error;
};

/// Admissibility violated where an admissible configuration is required.
class InadmissibleError : public Error {
public:
  using Error::Error;
};

// Warnings are routed through a replaceable sink (stderr by default).
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace solvlab
