/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace tempdrift {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data or a violated data invariant. CLI exit code 2.
class DataError : public Error {
  public:
    using Error::Error;
};

/// Invalid arguments or configuration. CLI exit code 1.
class UsageError : public Error {
  public:
    using Error::Error;
};

/// A trainer failed, crashed, timed out or misbehaved. CLI exit code 3.
class TrainerError : public Error {
  public:
    using Error::Error;
};

/// The external trainer answered with something the wire protocol forbids.
class ProtocolError : public TrainerError {
  public:
    using TrainerError::TrainerError;
};

/// The trainer does not implement the requested phase (e.g. pre-training on a built-in).
class UnsupportedCapability : public TrainerError {
  public:
    using TrainerError::TrainerError;
};

}// namespace tempdrift
