/* Copyright 2026 The CGM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CGM_ERRORS_HPP_
#define CGM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cgm {

// Base of every error raised by the library. The CLI maps subclasses to
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint and run configuration disagree on a hyperparameter.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// Data-level degeneracies (zero-variance window, zero-volume day). Callers
// usually skip the offending record and count it.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace cgm

#endif  // CGM_ERRORS_HPP_
