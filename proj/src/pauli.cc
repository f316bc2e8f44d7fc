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

#include "ddsim/pauli.h"

#include <bit>
#include <stdexcept>

namespace ddsim {

namespace {

uint32_t qubit_mask(int n_qubits) {
    return n_qubits == 32 ? ~uint32_t{0} : (uint32_t{1} << n_qubits) - 1;
}

void check_same_size(const PauliString& p, const PauliString& q) {
    if (p.n_qubits() != q.n_qubits()) {
        throw std::invalid_argument("Pauli strings act on " + std::to_string(p.n_qubits()) + " and " +
                                    std::to_string(q.n_qubits()) + " qubits");
    }
}

// Power of i picked up by the single-qubit product s(x1,z1) * s(x2,z2).
int product_phase(bool x1, bool z1, bool x2, bool z2) {
    if (x1 && z1) {
        return int(z2) - int(x2);
    }
    if (x1) {
        return int(z2) * (2 * int(x2) - 1);
    }
    if (z1) {
        return int(x2) * (1 - 2 * int(z2));
    }
    return 0;
}

constexpr Complex kIPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

PauliString::PauliString(int n_qubits) : PauliString(n_qubits, 0, 0, 0) {
}

PauliString::PauliString(int n_qubits, uint32_t x_bits, uint32_t z_bits, int phase_exp)
    : n_qubits_(n_qubits), x_(x_bits), z_(z_bits), phase_(((phase_exp % 4) + 4) % 4) {
    if (n_qubits < 0 || n_qubits > kMaxPauliQubits) {
        throw std::invalid_argument("Pauli string width " + std::to_string(n_qubits) + " unsupported");
    }
    if (((x_bits | z_bits) & ~qubit_mask(n_qubits)) != 0) {
        throw std::invalid_argument("Pauli bits set beyond qubit count");
    }
}

PauliString PauliString::from_str(std::string_view text) {
    int phase = 0;
    if (text.starts_with("-i")) {
        phase = 3;
        text.remove_prefix(2);
    } else if (text.starts_with("+i")) {
        phase = 1;
        text.remove_prefix(2);
    } else if (text.starts_with("i")) {
        phase = 1;
        text.remove_prefix(1);
    } else if (text.starts_with("-")) {
        phase = 2;
        text.remove_prefix(1);
    } else if (text.starts_with("+")) {
        text.remove_prefix(1);
    }
    if (text.size() > kMaxPauliQubits) {
        throw std::invalid_argument("Pauli string too long");
    }
    uint32_t x = 0, z = 0;
    for (std::size_t k = 0; k < text.size(); ++k) {
        uint32_t bit = uint32_t{1} << k;
        switch (text[k]) {
            case 'I':
            case '_':
                break;
            case 'X':
                x |= bit;
                break;
            case 'Y':
                x |= bit;
                z |= bit;
                break;
            case 'Z':
                z |= bit;
                break;
            default:
                throw std::invalid_argument("invalid Pauli symbol '" + std::string(1, text[k]) + "'");
        }
    }
    return PauliString(static_cast<int>(text.size()), x, z, phase);
}

PauliString PauliString::single(int n_qubits, int qubit, char symbol) {
    if (qubit < 0 || qubit >= n_qubits) {
        throw std::invalid_argument("qubit index out of range");
    }
    std::string s(n_qubits, 'I');
    s[qubit] = symbol;
    return from_str(s);
}

char PauliString::symbol(int qubit) const {
    bool x = (x_ >> qubit) & 1;
    bool z = (z_ >> qubit) & 1;
    return "IZXY"[2 * x + z];
}

int PauliString::weight() const {
    return std::popcount(x_ | z_);
}

int PauliString::y_count() const {
    return std::popcount(x_ & z_);
}

std::string PauliString::str() const {
    std::string s(n_qubits_, 'I');
    for (int k = 0; k < n_qubits_; ++k) {
        s[k] = symbol(k);
    }
    return s;
}

std::string PauliString::str_with_phase() const {
    static constexpr const char* kPrefix[4] = {"+", "+i", "-", "-i"};
    return kPrefix[phase_] + str();
}

PauliString PauliString::adjoint() const {
    return with_phase(-phase_);
}

PauliString PauliString::with_phase(int phase_exp) const {
    return PauliString(n_qubits_, x_, z_, phase_exp);
}

PauliString compose(const PauliString& p, const PauliString& q) {
    check_same_size(p, q);
    int phase = p.phase_exp() + q.phase_exp();
    uint32_t support = (p.x_bits() | p.z_bits()) & (q.x_bits() | q.z_bits());
    while (support != 0) {
        int k = std::countr_zero(support);
        support &= support - 1;
        phase += product_phase((p.x_bits() >> k) & 1, (p.z_bits() >> k) & 1, (q.x_bits() >> k) & 1,
                               (q.z_bits() >> k) & 1);
    }
    return PauliString(p.n_qubits(), p.x_bits() ^ q.x_bits(), p.z_bits() ^ q.z_bits(), phase);
}

bool anticommutes(const PauliString& p, const PauliString& q) {
    check_same_size(p, q);
    return (std::popcount((p.x_bits() & q.z_bits()) ^ (p.z_bits() & q.x_bits())) & 1) != 0;
}

int conj_sign(const PauliString& d, const PauliString& p) {
    return anticommutes(d, p) ? -1 : 1;
}

void apply_in_place(const PauliString& p, std::span<Complex> amplitudes, std::vector<Complex>& scratch) {
    if (p.n_qubits() > kMaxQubits || amplitudes.size() != (std::size_t{1} << p.n_qubits())) {
        throw std::invalid_argument("state dimension " + std::to_string(amplitudes.size()) +
                                    " does not match a " + std::to_string(p.n_qubits()) +
                                    "-qubit Pauli string");
    }
    // (P v)[m] = i^(phase + #Y) (-1)^{z.(m^x)} v[m^x]
    const uint32_t x = p.x_bits();
    const uint32_t z = p.z_bits();
    const Complex global = kIPowers[(p.phase_exp() + p.y_count()) % 4];
    scratch.assign(amplitudes.begin(), amplitudes.end());
    for (uint32_t m = 0; m < amplitudes.size(); ++m) {
        uint32_t src = m ^ x;
        Complex a = scratch[src];
        amplitudes[m] = (std::popcount(src & z) & 1) ? -global * a : global * a;
    }
}

StateVector apply(const PauliString& p, const StateVector& v) {
    StateVector out = v;
    std::vector<Complex> scratch;
    apply_in_place(p, out.amplitudes(), scratch);
    return out;
}

PauliString sample_uniform(Rng& rng, int n_qubits) {
    // 2 bits per qubit: 0 -> I, 1 -> X, 2 -> Y, 3 -> Z.
    static constexpr uint32_t kX[4] = {0, 1, 1, 0};
    static constexpr uint32_t kZ[4] = {0, 0, 1, 1};
    uint32_t x = 0, z = 0;
    uint64_t word = 0;
    for (int k = 0; k < n_qubits; ++k) {
        if (k % 32 == 0) {
            word = rng.next_u64();
        }
        unsigned code = word & 3;
        word >>= 2;
        x |= kX[code] << k;
        z |= kZ[code] << k;
    }
    return PauliString(n_qubits, x, z, 0);
}

}  // namespace ddsim
