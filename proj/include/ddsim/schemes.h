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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddsim/model.h"
#include "ddsim/pauli.h"
#include "ddsim/rng.h"

namespace ddsim {

/// rows x cols table over the alphabet {0, ..., q-1}, row-major.
class SymbolArray {
   public:
    SymbolArray(int rows, int cols, int q, std::vector<int> entries);

    int rows() const {
        return rows_;
    }
    int cols() const {
        return cols_;
    }
    int q() const {
        return q_;
    }
    int at(int row, int col) const {
        return entries_[static_cast<std::size_t>(row) * cols_ + col];
    }
    void set(int row, int col, int symbol);

   private:
    int rows_;
    int cols_;
    int q_;
    std::vector<int> entries_;
};

/// OA(2q^2, 2q+1, q, 2) for q in {2, 4}. Rows are listed in lexicographic
/// order; the first row is all zero.
///
/// For q = 4 the symbols are GF(2)^2: the rows are the vectors u of GF(2)^5,
/// column c is the pair of parities (a_c . u, b_c . u), where the planes
/// span(a_c, b_c) are pairwise trivially intersecting. Any two such columns
/// together form an invertible linear map of u, hence strength 2.
SymbolArray construct_oa(int q, int runs, int cols);

struct OaCheck {
    bool passed = true;
    /// On failure: the first column tuple and symbol tuple whose count is off.
    std::vector<int> columns;
    std::vector<int> symbols;
    int count = 0;
    int expected = 0;
};

/// Exact count check: every `strength` columns show each of the q^strength
/// symbol tuples exactly rows / q^strength times.
OaCheck verify_orthogonal_array(const SymbolArray& a, int strength);

/// Ordered frames d_0 ... d_{N-1}, each held for `step` (in units of tau).
class DecouplingCycle {
   public:
    DecouplingCycle(int n_qubits, std::vector<PauliString> frames, double step = 1.0);

    int n_qubits() const {
        return n_qubits_;
    }
    const std::vector<PauliString>& frames() const {
        return frames_;
    }
    int size() const {
        return static_cast<int>(frames_.size());
    }
    double step() const {
        return step_;
    }
    double cycle_time() const {
        return step_ * static_cast<double>(frames_.size());
    }

   private:
    int n_qubits_;
    std::vector<PauliString> frames_;
    double step_;
};

/// Row j becomes frame d_j with symbols 0, 1, 2, 3 -> I, X, Y, Z.
DecouplingCycle cycle_from_array(const SymbolArray& a, double step = 1.0);

/// sum_j conj_sign(d_j, p): the number of frames commuting with p minus the
/// number anticommuting.
int decoupling_sign_sum(const DecouplingCycle& cycle, const PauliString& p);

/// First-order average sum_j d_j^dagger H d_j * step. Terms whose sign sum
/// vanishes are dropped, so an empty result certifies first-order decoupling.
PauliSumHamiltonian verify_decoupling(const DecouplingCycle& cycle, const PauliSumHamiltonian& h);

/// The first Pauli string of weight 1..locality (by weight, then support,
/// then symbols X < Y < Z) that the cycle does not average to zero.
std::optional<PauliString> first_undecoupled_term(const DecouplingCycle& cycle, int locality);

/// Cycle file: header "N n_qubits", then N lines of Pauli strings.
void write_cycle(std::ostream& out, const DecouplingCycle& cycle);
/// Throws std::invalid_argument on malformed input.
DecouplingCycle read_cycle(std::istream& in, double step = 1.0);

enum class SchemeKind { kFree, kBangBang, kParec, kEmbedded };

std::string_view scheme_name(SchemeKind kind);
/// Accepts "free", "bang_bang", "parec", "embedded".
SchemeKind parse_scheme(std::string_view name);

struct SchemeSpec {
    SchemeKind kind = SchemeKind::kFree;
    std::optional<DecouplingCycle> cycle;  // required for bang_bang and embedded
    double pulse_interval = 1.0;

    bool is_stochastic() const {
        return kind == SchemeKind::kParec || kind == SchemeKind::kEmbedded;
    }
    /// Frames per deterministic cycle (1 for free and parec).
    int period() const {
        return cycle ? cycle->size() : 1;
    }
};

/// Throws std::invalid_argument if the cycle is missing where required, or
/// its width or step disagrees with `n_qubits` / pulse_interval.
void validate_scheme(const SchemeSpec& spec, int n_qubits);

/// Produces frames g_0, g_1, ... one at a time:
///   free      g_j = I
///   bang_bang g_j = d_{j mod N}
///   parec     g_j uniform random
///   embedded  g_j = d_{j mod N} r_{floor(j/N)}, r_m uniform random
/// Random strings are drawn from `rng` only when needed, in step order.
class FrameGenerator {
   public:
    FrameGenerator(const SchemeSpec& spec, int n_qubits, Rng& rng);

    PauliString next();

   private:
    const SchemeSpec& spec_;
    int n_qubits_;
    Rng& rng_;
    int64_t step_ = 0;
    PauliString random_frame_;
};

std::vector<PauliString> frame_sequence(const SchemeSpec& spec, int n_qubits, int64_t n_steps, Rng& rng);

/// Physical pulses p_j = g_j g_{j-1}^dagger with g_{-1} = I.
std::vector<PauliString> pulse_sequence(const std::vector<PauliString>& frames);

}  // namespace ddsim
