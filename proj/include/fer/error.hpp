// Copyright 2026-present the fercnn project
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

namespace fer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shapes or dimensions that do not fit the operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A layer or model used out of order, e.g. backward without a cached forward.
class StateError : public Error {
public:
    using Error::Error;
};

/// Bad input data: unreadable files, malformed manifests, undecodable images.
class DataError : public Error {
public:
    using Error::Error;
};

/// Checkpoint files that are truncated, corrupted, or built for another model.
class CheckpointError : public DataError {
public:
    using DataError::DataError;
};

/// Non-finite loss or parameters during training.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace fer
