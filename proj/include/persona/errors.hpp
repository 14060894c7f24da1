/*
 * Copyright 2026 The Persona Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PERSONA_ERRORS_HPP
#define PERSONA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace persona {

// Base of every error the library raises. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor extents.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (labels, CSV rows, manifest records).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A response sheet that does not cover every inventory item.
class CompletenessError : public Error {
 public:
  using Error::Error;
};

// Value outside its admissible interval.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, degenerate optimisation state.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Pearson correlation of a constant series.
class UndefinedCorrelation : public NumericError {
 public:
  using NumericError::NumericError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace persona

#endif  // PERSONA_ERRORS_HPP
