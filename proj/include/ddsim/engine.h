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
#include <vector>

#include "ddsim/linalg.h"
#include "ddsim/model.h"
#include "ddsim/rng.h"
#include "ddsim/schemes.h"
#include "ddsim/state_vector.h"

namespace ddsim {

/// Fidelity samples of one run or the mean over many. Times are in units of
/// tau and start at the first recorded step (there is no t = 0 row).
struct FidelityTrace {
    std::vector<double> times;
    std::vector<double> mean_fidelity;
    std::vector<double> std_error;  // standard error of the mean; 0 for one run
    int n_runs = 1;

    std::size_t size() const {
        return times.size();
    }
    /// Throws std::logic_error if lengths differ, times are not strictly
    /// increasing, or a fidelity is outside [0, 1 + 1e-10].
    void check() const;
};

/// Header `time_tau,mean_fidelity,std_error,n_runs`, numbers printed with 17
/// significant digits.
void write_trace_csv(std::ostream& out, const FidelityTrace& trace);
FidelityTrace read_trace_csv(std::istream& in);

/// Step unitary E = exp(-i H0 tau), the spectrum of H0 and, once a cycle is
/// attached, the cycle unitary U_c and residual Hamiltonian H_bar. Read-only
/// after setup, so it can be shared by Monte Carlo workers.
class PropagatorCache {
   public:
    PropagatorCache(const PauliSumHamiltonian& h0, double tau);
    /// For Hamiltonians without a Pauli-sum form (e.g. a residual H_bar).
    PropagatorCache(const DenseOperator& h0, double tau);

    /// Computes U_c and, if `with_residual`, H_bar = i log(U_c) / T_c.
    /// Throws BranchAmbiguityError if the logarithm is ill-defined.
    void attach_cycle(const DecouplingCycle& cycle, bool with_residual = true);

    int n_qubits() const {
        return n_qubits_;
    }
    double tau() const {
        return tau_;
    }
    const std::optional<PauliSumHamiltonian>& pauli_sum() const {
        return pauli_sum_;
    }
    const DenseOperator& hamiltonian() const {
        return h0_;
    }
    const HermitianSpectrum& spectrum() const {
        return spectrum_;
    }
    const DenseOperator& step_unitary() const {
        return step_;
    }

    bool has_cycle() const {
        return cycle_.has_value();
    }
    const DecouplingCycle& cycle() const;
    const DenseOperator& cycle_unitary() const;
    bool has_residual() const {
        return residual_.has_value();
    }
    const DenseOperator& residual() const;

   private:
    int n_qubits_;
    double tau_;
    std::optional<PauliSumHamiltonian> pauli_sum_;
    DenseOperator h0_;
    HermitianSpectrum spectrum_;
    DenseOperator step_;
    std::optional<DecouplingCycle> cycle_;
    std::optional<DenseOperator> cycle_unitary_;
    std::optional<DenseOperator> residual_;
};

/// d^dagger A d for a dense A, in O(dim^2).
Eigen::MatrixXcd conjugate_dense(const Eigen::MatrixXcd& a, const PauliString& d);

/// U_c = prod_j d_j^dagger E d_j, later frames to the left.
DenseOperator cycle_propagator(const DenseOperator& step_unitary, const DecouplingCycle& cycle);
DenseOperator cycle_propagator(const PauliSumHamiltonian& h0, const DecouplingCycle& cycle);

/// H_bar with U_c = exp(-i H_bar T_c). Throws BranchAmbiguityError when T_c is
/// too long for the principal branch.
DenseOperator residual_hamiltonian(const DenseOperator& u_c, double t_c);

/// One run of exact stepwise evolution: per step j the state is multiplied by
/// g_j^dagger E g_j with frames from FrameGenerator. The fidelity
/// |<psi0|psi>|^2 is recorded after every `record_stride` steps;
/// `record_stride` must divide `n_steps`.
FidelityTrace evolve(const PropagatorCache& cache, const SchemeSpec& spec, const StateVector& psi0,
                     int64_t n_steps, int64_t record_stride, Rng& rng);
FidelityTrace evolve(const PauliSumHamiltonian& h0, const SchemeSpec& spec, const StateVector& psi0,
                     int64_t n_steps, int64_t record_stride, Rng& rng);

/// Embedded scheme one cycle at a time: state <- r_m^dagger U_c r_m state,
/// recorded at every cycle boundary. Draws the same random frames as the
/// stepwise embedded evolution with the same generator.
FidelityTrace evolve_embedded_fast(const PropagatorCache& cache, const StateVector& psi0, int64_t n_cycles,
                                   Rng& rng);

/// Batched exp(-i tau g^dagger H g) for a Pauli-sum H, one frame g per lane.
///
/// Terms are grouped by X mask; each group acts as a bit-flip followed by a
/// row-dependent coefficient, so a Hamiltonian application costs (#groups)
/// multiply-adds per amplitude and lane. The exponential is a Taylor series
/// truncated where the remainder bound (tau*L)^(K+1)/(K+1)! * e^(tau*L) drops
/// below 2^-53, L = sum |c|.
class PauliSumStepper {
   public:
    static constexpr int kLanes = 8;

    PauliSumStepper(const PauliSumHamiltonian& h, double tau);

    /// False when tau * sum|c| is too large for an accurate truncated series.
    static bool applicable(const PauliSumHamiltonian& h, double tau);

    int order() const {
        return order_;
    }
    std::size_t dim() const {
        return dim_;
    }

    /// Amplitude m of all lanes.
    struct alignas(64) LaneBlock {
        double lane[kLanes];
    };
    /// Lane-interleaved state: re[m].lane[l] is Re psi_l[m].
    struct Batch {
        std::vector<LaneBlock> re;
        std::vector<LaneBlock> im;
    };
    /// Every lane set to psi.
    Batch make_batch(const StateVector& psi) const;
    StateVector lane_state(const Batch& batch, int lane) const;

    /// Advances every lane by one step in its own frame.
    void step(Batch& batch, const PauliString (&frames)[kLanes]);

    /// |<psi0|lane>|^2 for every lane.
    void fidelities(const Batch& batch, const StateVector& psi0, double (&out)[kLanes]) const;

   private:
    struct Group {
        uint32_t flip;
        std::size_t begin, end;  // range in terms_
        bool combo;
        std::size_t slot;  // first combo entry, or column in the row tables
    };
    template <bool kComplex>
    void step_impl(Batch& batch);

    int n_qubits_;
    std::size_t dim_;
    double tau_;
    int order_;
    bool complex_;
    std::vector<PauliString> terms_;
    std::vector<Complex> base_;  // c * i^#Y per term
    std::vector<Group> combo_groups_;
    std::vector<Group> table_groups_;
    std::size_t n_combo_entries_ = 0;
    std::vector<uint32_t> combo_index_;  // [m * n_combo + j]
    // Per-step coefficients: sign combinations of the small groups, and full
    // per-row tables [m * n_table + j] of the large ones.
    std::vector<LaneBlock> combo_re_, combo_im_;
    std::vector<LaneBlock> table_re_, table_im_;
    std::vector<LaneBlock> scratch_re_, scratch_im_;
    std::vector<LaneBlock> work_re_[2], work_im_[2];
};

struct MonteCarloOptions {
    /// 0 means: DDSIM_NUM_THREADS if set, else the hardware concurrency.
    int workers = 0;
    /// Allow the batched Pauli-sum stepper and cycle-level fast paths;
    /// otherwise every run uses the stepwise reference `evolve`.
    bool fast_paths = true;
};

/// Worker count after applying the DDSIM_NUM_THREADS override.
int resolve_workers(int requested);

/// Mean and standard error over `n_runs` runs; run r uses
/// Rng::derive(master_seed, r). Runs are processed in fixed batches and the
/// statistics merged in run order, so the result does not depend on the
/// worker count. Deterministic schemes are evaluated once (std_error = 0).
FidelityTrace monte_carlo(const PropagatorCache& cache, const SchemeSpec& spec, const StateVector& psi0,
                          int64_t n_steps, int64_t record_stride, int n_runs, uint64_t master_seed,
                          const MonteCarloOptions& options = {});

/// Exact free evolution |<psi0|exp(-i H0 t)|psi0>|^2 from the spectrum.
FidelityTrace free_evolution_trace(const PropagatorCache& cache, const StateVector& psi0, int64_t n_steps,
                                   int64_t record_stride);

}  // namespace ddsim
