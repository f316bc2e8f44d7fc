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

#include "ddsim/state_vector.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ddsim {

namespace {

void check_qubits(int n_qubits) {
    if (n_qubits < 0 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("qubit count " + std::to_string(n_qubits) + " outside [0, " +
                                    std::to_string(kMaxQubits) + "]");
    }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_qubits(n_qubits);
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{});
    amplitudes_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    check_qubits(n_qubits);
    if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
        throw std::invalid_argument("amplitude count " + std::to_string(amplitudes_.size()) +
                                    " is not 2^" + std::to_string(n_qubits));
    }
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
    StateVector v(n_qubits);
    if (index >= v.dim()) {
        throw std::invalid_argument("basis index out of range");
    }
    v[0] = 0.0;
    v[index] = 1.0;
    return v;
}

double StateVector::norm() const {
    double s = 0;
    for (const auto& a : amplitudes_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

void StateVector::normalize() {
    double n = norm();
    if (n == 0) {
        throw std::invalid_argument("cannot normalize the zero vector");
    }
    for (auto& a : amplitudes_) {
        a /= n;
    }
}

Complex inner(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("inner product of vectors with different dimensions");
    }
    Complex s{};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}

double fidelity(const StateVector& reference, const StateVector& state) {
    return std::norm(inner(reference, state));
}

}  // namespace ddsim
