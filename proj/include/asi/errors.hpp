#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace asi {

// Invalid or inconsistent configuration / input data. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Any failure of a numerical kernel. CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class FactorizationError : public NumericalError {
  public:
    explicit FactorizationError(const std::string& what) : NumericalError(what) {}
};

class ConvergenceError : public NumericalError {
  public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : NumericalError(what), achieved_residuals(std::move(residuals)) {}
    std::vector<double> achieved_residuals;
};

// Candidate medium dipped to a nonpositive value; the optimizer backtracks on this.
class NonpositiveMediumError : public NumericalError {
  public:
    explicit NonpositiveMediumError(double min_value)
        : NumericalError("medium is nonpositive, min value " + std::to_string(min_value)),
          min_value(min_value) {}
    double min_value;
};

class RegionSeparationError : public ConfigError {
  public:
    explicit RegionSeparationError(const std::string& what) : ConfigError(what) {}
};

}  // namespace asi
