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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddsim/analysis.h"
#include "ddsim/engine.h"
#include "ddsim/model.h"
#include "ddsim/schemes.h"

namespace ddsim {

/// One experiment, read from a JSON document. Keys and defaults:
///
///   n_qubits          required, 1..12
///   rows, cols        grid shape (rows * cols == n_qubits); or
///   edges             explicit list of [k, l] pairs
///   coupling_bound    sqrt(3) * 1e-3
///   delta_mode        "sample" | "zero"                        ("sample")
///   hamiltonian       optional list of [coefficient, "pauli"] replacing the
///                     random draw
///   initial_state     "coherent" | "plus"                      ("coherent")
///   cycle             "oa" (OA(32,9,4,2), 9 qubits only), a cycle file path
///                     relative to the config file, or null     ("oa" for 9
///                     qubits, else null)
///   schemes           subset of free, bang_bang, parec, embedded  (all four)
///   n_steps           required
///   record_stride     number, or object scheme -> number; per-scheme
///                     default 1 for free/parec, cycle length for
///                     bang_bang/embedded
///   n_runs            200
///   master_seed       required
///   disorder_seed     optional; fixes H0 independently of master_seed
///   output_dir        "out"
///   workers           0 (DDSIM_NUM_THREADS or hardware concurrency)
struct ExperimentConfig {
    int n_qubits = 0;
    std::optional<std::pair<int, int>> grid;
    std::vector<std::pair<int, int>> edges;
    double coupling_bound = 1.7320508075688772e-3;
    DeltaMode delta_mode = DeltaMode::kSample;
    std::optional<std::vector<std::pair<double, std::string>>> hamiltonian;
    std::string initial_state = "coherent";
    std::optional<std::string> cycle;  // "oa" or a resolved path
    std::vector<SchemeKind> schemes;
    int64_t n_steps = 0;
    std::map<SchemeKind, int64_t> record_stride;  // explicit entries only
    int n_runs = 200;
    uint64_t master_seed = 0;
    std::optional<uint64_t> disorder_seed;
    std::filesystem::path output_dir = "out";
    int workers = 0;

    /// Throws std::invalid_argument with a diagnostic on any bad field.
    static ExperimentConfig from_json(const std::string& text, const std::filesystem::path& base_dir = ".");
    static ExperimentConfig load(const std::filesystem::path& file);

    CouplingGraph graph() const;
    int64_t stride_for(SchemeKind kind, int cycle_length) const;
};

/// The instance built from a config: H0, initial state, cycle and the
/// propagator cache (with U_c and H_bar when a cycle is configured).
struct Instance {
    PauliSumHamiltonian h0;
    StateVector psi0;
    std::optional<DecouplingCycle> cycle;
    std::optional<PropagatorCache> cache;
};

Instance build_instance(const ExperimentConfig& config);

/// Derived scalars in output order (name, value). Cycle-dependent entries are
/// NaN without a cycle.
std::vector<std::pair<std::string, double>> instance_scalars(const Instance& instance);
BoundInputs bound_inputs(const Instance& instance);

/// Master seed of the Monte Carlo runs of one scheme.
uint64_t scheme_seed(uint64_t master_seed, SchemeKind kind);

struct ExperimentResult {
    std::vector<std::pair<SchemeKind, FidelityTrace>> traces;
    std::vector<std::pair<std::string, double>> scalars;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const Instance& instance);

/// Bound grid: t = 0, T, 2T, ..., n_steps with T the cycle length (1 without
/// a cycle).
std::vector<double> bounds_times(const ExperimentConfig& config, const Instance& instance);

/// Writes trace_<scheme>.csv, scalars.csv, bounds.csv, hamiltonian.txt and
/// (with a cycle) cycle.txt into `dir`.
void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config, const Instance& instance,
                      const ExperimentResult& result);

/// `scalars.csv`: header `name,value`, values with 17 significant digits.
void write_scalars_csv(std::ostream& out, const std::vector<std::pair<std::string, double>>& scalars);

/// Exit status of the verify-cycle command: 0 if every Pauli term of weight
/// up to `locality` is averaged to zero, 1 (violator printed to `out`)
/// otherwise, 2 if the file cannot be read or parsed.
int verify_cycle_file(const std::filesystem::path& file, int locality, std::ostream& out, std::ostream& err);

}  // namespace ddsim
