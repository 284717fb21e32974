// Copyright 2026 The patchpose Authors
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

#ifndef PATCHPOSE_ERRORS_HPP_
#define PATCHPOSE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace patchpose {

/// A computation hit a geometric degeneracy (collinear correspondences,
/// singular homography).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point at or behind the camera plane was projected.
class BehindCameraError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system or serialization failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quality gate (classifier accuracy) was not met.
class GateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace patchpose

#endif  // PATCHPOSE_ERRORS_HPP_
