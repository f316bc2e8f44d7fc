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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ddsim {

using Complex = std::complex<double>;

/// Largest register the dense simulator accepts.
inline constexpr int kMaxQubits = 12;

/// Dense amplitude vector of an n-qubit register. Qubit k is bit k of the
/// basis index.
class StateVector {
   public:
    /// |0...0>.
    explicit StateVector(int n_qubits);
    /// Takes ownership of `amplitudes`; its length must be 2^n_qubits.
    StateVector(int n_qubits, std::vector<Complex> amplitudes);

    static StateVector basis(int n_qubits, std::size_t index);

    int n_qubits() const {
        return n_qubits_;
    }
    std::size_t dim() const {
        return amplitudes_.size();
    }

    std::span<const Complex> amplitudes() const {
        return amplitudes_;
    }
    std::span<Complex> amplitudes() {
        return amplitudes_;
    }
    const Complex& operator[](std::size_t i) const {
        return amplitudes_[i];
    }
    Complex& operator[](std::size_t i) {
        return amplitudes_[i];
    }

    double norm() const;
    void normalize();

    bool operator==(const StateVector&) const = default;

   private:
    int n_qubits_;
    std::vector<Complex> amplitudes_;
};

/// <a|b>.
Complex inner(const StateVector& a, const StateVector& b);

/// |<reference|state>|^2.
double fidelity(const StateVector& reference, const StateVector& state);

}  // namespace ddsim
