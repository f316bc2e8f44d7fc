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

#include <Eigen/Dense>
#include <cstddef>

#include "ddsim/state_vector.h"

namespace ddsim {

enum class OperatorKind { kHermitian, kUnitary, kGeneral };

/// Dense operator on a 2^n-dimensional space. The kind tag is checked on
/// construction:
///   hermitian: max |A - A^dagger| <= 1e-12 * max |A|
///   unitary:   max |A^dagger A - 1| <= 1e-10
class DenseOperator {
   public:
    DenseOperator(Eigen::MatrixXcd matrix, OperatorKind kind);

    static DenseOperator identity(std::size_t dim);
    static DenseOperator zero(std::size_t dim);

    std::size_t dim() const {
        return static_cast<std::size_t>(matrix_.rows());
    }
    OperatorKind kind() const {
        return kind_;
    }
    const Eigen::MatrixXcd& matrix() const {
        return matrix_;
    }

   private:
    Eigen::MatrixXcd matrix_;
    OperatorKind kind_;
};

/// Eigendecomposition A = V diag(eigenvalues) V^dagger, eigenvalues ascending.
struct HermitianSpectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
};

/// Throws std::invalid_argument unless H is hermitian-tagged.
HermitianSpectrum hermitian_eig(const DenseOperator& h);

/// One Newton-Schulz step U (3 - U^dagger U) / 2 toward the nearest unitary.
/// Products of eigendecompositions drift from unitarity by ~1e-13, which
/// accumulates over 1e5 steps; after this step the error is at rounding level.
/// Throws std::invalid_argument if `u` is not within 1e-6 of unitary.
DenseOperator reunitarize(const Eigen::MatrixXcd& u);

/// exp(-i H t) with hbar = 1.
DenseOperator expm_hermitian(const DenseOperator& h, double t);
DenseOperator expm_hermitian(const HermitianSpectrum& spectrum, double t);

/// Eigenphases closer than this to +-pi make the logarithm branch-ambiguous.
inline constexpr double kBranchMargin = 1e-6;

/// The Hermitian H with U = exp(-i H T), taking eigenphases on the principal
/// branch. Throws BranchAmbiguityError if any eigenphase lies within
/// kBranchMargin of +-pi.
DenseOperator unitary_log(const DenseOperator& u, double t);

/// max |eigenvalue| of a hermitian-tagged operator.
double spectral_norm(const DenseOperator& h);

/// A v. Throws std::invalid_argument on dimension mismatch.
StateVector matvec(const DenseOperator& a, const StateVector& v);
void matvec_in_place(const DenseOperator& a, std::span<Complex> amplitudes, Eigen::VectorXcd& scratch);

/// Largest entry of |A - B|.
double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace ddsim
