// ----------------------------------------------------------------------------
// Copyright 2026 The shapeprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace shapeprior {

// Base for every error raised by the library. The C API maps the dynamic type
// onto an sp_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes, dimensions or indices that do not agree with each other.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// An API used out of order (e.g. backward without a forward record).
class UsageError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf or divergence during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid JSON configuration: unknown keys, wrong types, out-of-range values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class FormatIssue {
  missing_header,
  header_not_json,
  bad_magic,
  bad_dims,
  bad_spacing,
  bad_n_class,
  payload_length_mismatch,
  label_out_of_range,
  bad_array_table,
  descriptor_mismatch,
};

const char* to_string(FormatIssue issue);

// Malformed file contents. Each issue has its own diagnostic prefix.
class FormatError : public StructuralError {
 public:
  FormatError(FormatIssue issue, const std::string& detail)
      : StructuralError(std::string(to_string(issue)) + ": " + detail), issue_(issue), detail_(detail) {}

  FormatIssue issue() const noexcept { return issue_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  FormatIssue issue_;
  std::string detail_;
};

}  // namespace shapeprior
