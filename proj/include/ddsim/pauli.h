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

#include <cstdint>
#include <string>
#include <string_view>

#include "ddsim/rng.h"
#include "ddsim/state_vector.h"

namespace ddsim {

/// Largest Pauli string width (one bit per qubit in a 32-bit mask).
inline constexpr int kMaxPauliQubits = 32;

/// An n-qubit Pauli operator i^phase_exp * (s_0 (x) s_1 (x) ... ) in symplectic
/// form. Qubit k carries (x_k, z_k): (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z, with
/// Y the Hermitian Pauli matrix (not XZ).
class PauliString {
   public:
    /// The identity on zero qubits.
    PauliString() = default;
    /// The identity on `n_qubits` qubits.
    explicit PauliString(int n_qubits);
    PauliString(int n_qubits, uint32_t x_bits, uint32_t z_bits, int phase_exp = 0);

    /// Parses the textual form: an optional sign prefix ("+", "-", "i", "-i")
    /// followed by one of I/X/Y/Z per qubit, leftmost character = qubit 0.
    /// '_' is accepted for identity.
    static PauliString from_str(std::string_view text);

    /// Identity everywhere except `symbol` on `qubit`.
    static PauliString single(int n_qubits, int qubit, char symbol);

    int n_qubits() const {
        return n_qubits_;
    }
    uint32_t x_bits() const {
        return x_;
    }
    uint32_t z_bits() const {
        return z_;
    }
    int phase_exp() const {
        return phase_;
    }

    /// 'I', 'X', 'Y' or 'Z'.
    char symbol(int qubit) const;
    /// Number of non-identity factors.
    int weight() const;
    int y_count() const;
    /// True if the tensor factors are all identity (the phase is ignored).
    bool is_identity() const {
        return (x_ | z_) == 0;
    }

    /// Tensor factors only, e.g. "XIZ". Use str_with_phase() to include i^k.
    std::string str() const;
    std::string str_with_phase() const;

    PauliString adjoint() const;
    /// Same tensor factors with phase i^phase_exp.
    PauliString with_phase(int phase_exp) const;

    bool operator==(const PauliString&) const = default;

   private:
    int n_qubits_ = 0;
    uint32_t x_ = 0;
    uint32_t z_ = 0;
    int phase_ = 0;
};

/// Operator product p*q, including the accumulated power of i.
PauliString compose(const PauliString& p, const PauliString& q);

/// True iff p and q anticommute (odd symplectic product).
bool anticommutes(const PauliString& p, const PauliString& q);

/// The sign s with d^dagger p d = s p.
int conj_sign(const PauliString& d, const PauliString& p);

/// p|v>, as a signed, phase-carrying permutation of amplitudes.
StateVector apply(const PauliString& p, const StateVector& v);
/// In-place form of apply(); `scratch` is resized as needed.
void apply_in_place(const PauliString& p, std::span<Complex> amplitudes,
                    std::vector<Complex>& scratch);

/// Each qubit's factor drawn independently and uniformly from {I, X, Y, Z}.
/// Consumes one 64-bit word per 32 qubits.
PauliString sample_uniform(Rng& rng, int n_qubits);

}  // namespace ddsim
