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
#include <vector>

#include "ddsim/engine.h"

namespace ddsim {

/// Scalars entering the closed-form decay laws and bounds (hbar = 1, times in
/// units of tau).
struct BoundInputs {
    double h0_norm = 0;     // ||H0||
    double delta_h0 = 0;    // energy uncertainty of H0
    double delta_hbar = 0;  // energy uncertainty of H_bar
    double hbar_norm = 0;   // ||H_bar||
    double t_c = 1;         // cycle time
    double dt = 1;          // pulse interval of the random scheme

    /// Throws std::invalid_argument if an input is negative or an uncertainty
    /// exceeds its norm (by more than rounding).
    void check() const;
};

/// 1 - (t dH0)^2, clamped at 0.
std::vector<double> free_decay_approx(double delta_h0, const std::vector<double>& times);
/// 1 - (t dHbar)^2, clamped at 0.
std::vector<double> det_decay_approx(double delta_hbar, const std::vector<double>& times);
/// 1 - rate * t, clamped at 0.
std::vector<double> linear_decay_approx(double rate, const std::vector<double>& times);
/// exp(-(t dH)^2).
std::vector<double> gaussian_decay(double delta_h, const std::vector<double>& times);
/// exp(-rate t).
std::vector<double> exponential_decay(double rate, const std::vector<double>& times);

/// Golden-rule rate of the random scheme, dt * dH0^2.
double parec_rate(double delta_h0, double dt);
/// The same rate for the residual interaction, t_c * dHbar^2.
double embedded_rate(double delta_hbar, double t_c);

/// x* with e^x* - x* = 2; beyond it the residual norm bound is vacuous.
double critical_x();
/// -ln(2 - e^x + x) / t_c with x = ||H0|| t_c. Throws std::domain_error for
/// x >= x*.
double residual_norm_bound(double h0_norm, double t_c);
/// Leading small-x form ||H0||^2 t_c / 2.
double residual_norm_bound_small_x(double h0_norm, double t_c);

/// Deterministic bound 1 - (||H0||^2 t t_c / 2)^2. Meaningful for x << 1.
std::vector<double> det_bound(double h0_norm, double t_c, const std::vector<double>& times);
/// Mean-fidelity bound of the random scheme, 1 - ||H0||^2 t dt.
std::vector<double> parec_bound(double h0_norm, double dt, const std::vector<double>& times);
/// Mean-fidelity bound of the embedded scheme, 1 - (||H0||^2 t_c / 2)^2 t t_c.
std::vector<double> embedded_bound(double h0_norm, double t_c, const std::vector<double>& times);

/// Header `time_tau,eq5_bound,eq6_bound,eq7_bound,eq3_approx,eq8_approx,
/// parec_rate_pred,embedded_rate_pred`. Bounds are written unclamped; the
/// approximations and rate predictions (1 - rate t) are clamped at 0.
void write_bounds_csv(std::ostream& out, const std::vector<double>& times, const BoundInputs& in);

struct FitWindow {
    double min_deficit = 1e-6;
    double max_deficit = 1e-1;
    int min_points = 10;
};

struct FitResult {
    double value = 0;
    double std_error = 0;
    int n_points = 0;
};

/// Least-squares slope of log(1 - f) against log t over points with deficit
/// inside the window and above 3 standard errors. Throws
/// InsufficientDataError if fewer than window.min_points qualify.
FitResult fit_loglog_slope(const FidelityTrace& trace, const FitWindow& window = {});

/// Least-squares rate G of -ln f = G t (line through the origin), over the
/// same point selection as fit_loglog_slope.
FitResult fit_decay_rate(const FidelityTrace& trace, const FitWindow& window = {});

/// Exact ensemble mean of |<psi|W|psi>|^2 where W is a product of `n`
/// independent uniformly Pauli-conjugated copies g^dagger U g, for each n in
/// `counts`. The twirl turns U into a Pauli channel with probabilities
/// p_P = |Tr(P U)|^2 / D^2, diagonal in the Pauli basis, so
///   E f(n) = (1/D) sum_Q <psi|Q|psi>^2 lambda_Q^n,
///   lambda_Q = sum_P p_P (-1)^{[P, Q] != 0}.
/// All transforms are fast Walsh-Hadamard transforms: O(D^2 log D).
/// With U = E this is the mean PAREC fidelity after n steps; with U = U_c the
/// mean embedded fidelity after n cycles.
std::vector<double> pauli_twirl_mean_fidelity(const DenseOperator& u, const StateVector& psi,
                                              const std::vector<int64_t>& counts);

}  // namespace ddsim
