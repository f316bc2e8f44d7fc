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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ddsim/linalg.h"
#include "ddsim/pauli.h"
#include "ddsim/rng.h"
#include "ddsim/state_vector.h"

namespace ddsim {

/// Undirected coupling graph; edges stored as (k, l) with k < l, no duplicates.
class CouplingGraph {
   public:
    CouplingGraph(int n_qubits, std::vector<std::pair<int, int>> edges);

    int n_qubits() const {
        return n_qubits_;
    }
    const std::vector<std::pair<int, int>>& edges() const {
        return edges_;
    }

   private:
    int n_qubits_;
    std::vector<std::pair<int, int>> edges_;
};

/// Nearest-neighbour (horizontal + vertical) edges of a rows x cols grid,
/// qubit index = row * cols + col.
CouplingGraph grid_graph(int rows, int cols);

/// Perturbation strengths in units of 1/tau (hbar = 1): `delta[k]` multiplies
/// Z_k, `j_coupling[e]` multiplies XX + YY + ZZ on edge e.
struct PerturbationParams {
    std::vector<double> delta;
    std::vector<double> j_coupling;
};

enum class DeltaMode { kSample, kZero };

/// Draws every J (and every delta, unless `delta_mode` is kZero) i.i.d.
/// uniform on [-bound, bound]. Deltas are drawn first, then couplings in edge
/// order.
PerturbationParams sample_params(Rng& rng, double bound, const CouplingGraph& graph,
                                 DeltaMode delta_mode = DeltaMode::kSample);

struct HamiltonianTerm {
    double coefficient;
    PauliString pauli;  // phase_exp == 0
};

/// Real-weighted sum of phase-free Pauli strings. Hermitian by construction.
/// Adding a string that is already present merges the coefficients.
class PauliSumHamiltonian {
   public:
    explicit PauliSumHamiltonian(int n_qubits) : n_qubits_(n_qubits) {
    }

    void add_term(double coefficient, const PauliString& pauli);

    int n_qubits() const {
        return n_qubits_;
    }
    const std::vector<HamiltonianTerm>& terms() const {
        return terms_;
    }
    bool empty() const {
        return terms_.empty();
    }

    /// Sum of |coefficient|; an upper bound on the spectral norm.
    double l1_norm() const;

    /// Dense 2^n x 2^n matrix (hermitian-tagged).
    DenseOperator dense() const;

    /// H|v>.
    StateVector apply(const StateVector& v) const;

   private:
    int n_qubits_;
    std::vector<HamiltonianTerm> terms_;
};

/// sum_k delta_k Z_k + sum_(k,l) J_kl (X_k X_l + Y_k Y_l + Z_k Z_l), skipping
/// zero coefficients.
PauliSumHamiltonian build_hamiltonian(const PerturbationParams& params, const CouplingGraph& graph);

/// Coefficients multiplied by conj_sign(d, term), i.e. d^dagger H d.
PauliSumHamiltonian conjugate_by_pauli(const PauliSumHamiltonian& h, const PauliString& d);

/// Gaussian wave packet a_m = exp(-i pi m - pi (m - D/2)^2 / D), D = 2^n,
/// normalized to unit norm.
StateVector initial_coherent_state(int n_qubits);

/// sqrt(<H^2> - <H>^2) in state psi.
double energy_uncertainty(const PauliSumHamiltonian& h, const StateVector& psi);
double energy_uncertainty(const DenseOperator& h, const StateVector& psi);

/// One "coefficient pauli_string" line per term, coefficients with 17
/// significant digits.
void write_hamiltonian_text(std::ostream& out, const PauliSumHamiltonian& h);
PauliSumHamiltonian read_hamiltonian_text(std::istream& in);

}  // namespace ddsim
