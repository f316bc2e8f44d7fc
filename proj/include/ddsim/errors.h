// Copyright 2026 The ddsim Authors
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

namespace ddsim {

/// A unitary has an eigenphase too close to +-pi for its logarithm to be
/// defined unambiguously (the evolution time is too long).
class BranchAmbiguityError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A fit had too few usable points.
class InsufficientDataError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace ddsim
