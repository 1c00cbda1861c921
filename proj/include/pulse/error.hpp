#pragma once

#include <stdexcept>
#include <string>

namespace pulse {

// Root of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// Design matrix is rank deficient; the message names the offending columns.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  ClassificationError(std::string zone_id, const std::string& what)
      : Error("zone '" + zone_id + "': " + what), zone_id_(std::move(zone_id)) {}

  const std::string& zone_id() const noexcept { return zone_id_; }

 private:
  std::string zone_id_;
};

}  // namespace pulse
