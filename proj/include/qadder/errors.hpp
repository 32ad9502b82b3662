// Copyright 2026 The qadder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qadder {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public Error {
 public:
  using Error::Error;
};

class LayoutMismatchError : public Error {
 public:
  using Error::Error;
};

class TruncationTooSmallError : public Error {
 public:
  TruncationTooSmallError(const std::string& what, int minimal_dim)
      : Error(what), minimal_dim_(minimal_dim) {}
  int minimal_dim() const { return minimal_dim_; }

 private:
  int minimal_dim_;
};

class NumericalPositivityError : public Error {
 public:
  using Error::Error;
};

class ResonanceError : public Error {
 public:
  using Error::Error;
};

class InvalidScheduleError : public Error {
 public:
  using Error::Error;
};

class RegimeViolationError : public Error {
 public:
  using Error::Error;
};

class ScheduleInconsistencyError : public Error {
 public:
  using Error::Error;
};

class AsymmetricParamsError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_good_time)
      : Error(what), last_good_time_(last_good_time) {}
  double last_good_time() const { return last_good_time_; }

 private:
  double last_good_time_;
};

class EmptyBranchError : public Error {
 public:
  using Error::Error;
};

class DestructiveInterferenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qadder
