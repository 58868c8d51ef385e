#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fecg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when one applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  explicit ParseError(const std::string& what) : ParseError(what, 0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Fewer than two qualifying peaks; no heart rate can be formed.
class NoEstimateError : public Error {
 public:
  using Error::Error;
};

/// Series and parallel datapaths disagreed on an error-signal sample.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t sample)
      : Error(what + " at sample " + std::to_string(sample)), sample_(sample) {}

  std::size_t sample() const noexcept { return sample_; }

 private:
  std::size_t sample_;
};

}  // namespace fecg
